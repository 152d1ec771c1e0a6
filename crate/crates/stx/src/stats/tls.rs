//! Total least squares: orthogonal-distance line fitting for comparing
//! two datasets on equal footing (neither axis is privileged).

use crate::error::{Result, StxError};

/// Fit `y = slope·x + intercept` by total least squares: the line through
/// the centroid along the principal eigenvector of the centered 2×2
/// covariance matrix, so residuals are measured perpendicular to the line
/// rather than vertically.
///
/// Pairs with a non-finite coordinate are ignored. Errors when fewer than
/// two finite pairs remain, when both coordinates have zero variance, or
/// when the principal direction is vertical (the slope is unrepresentable).
pub fn tls_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(StxError::domain(format!(
            "coordinate lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(&a, &b)| (a, b))
        .collect();
    let n = pairs.len();
    if n < 2 {
        return Err(StxError::domain(format!(
            "total least squares needs at least 2 finite pairs, got {n}"
        )));
    }
    let xbar = pairs.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let ybar = pairs.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(px, py) in &pairs {
        let (dx, dy) = (px - xbar, py - ybar);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 && syy == 0.0 {
        return Err(StxError::domain(
            "total least squares is undefined for a degenerate point cloud",
        ));
    }

    let slope = if sxy == 0.0 {
        if syy > sxx {
            // All variance is vertical: the principal direction is the
            // y-axis and no finite slope exists.
            return Err(StxError::domain(
                "principal direction is vertical; slope is unrepresentable",
            ));
        }
        0.0
    } else {
        // Largest eigenvalue of [[sxx, sxy], [sxy, syy]]; the matching
        // eigenvector is (sxy, λ − sxx).
        let lambda = 0.5 * (sxx + syy + ((sxx - syy).powi(2) + 4.0 * sxy * sxy).sqrt());
        (lambda - sxx) / sxy
    };
    Ok((slope, ybar - slope * xbar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn exact_line_is_recovered() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.5 - 3.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let (slope, intercept) = tls_fit(&x, &y).unwrap();
        assert_relative_eq!(slope, 2.0, max_relative = 1e-12);
        assert_relative_eq!(intercept, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn swapping_axes_inverts_the_slope_for_collinear_data() {
        let x: Vec<f64> = (1..30).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let (forward, _) = tls_fit(&x, &y).unwrap();
        let (backward, _) = tls_fit(&y, &x).unwrap();
        assert_relative_eq!(backward, 1.0 / forward, max_relative = 1e-12);
    }

    #[test]
    fn isotropic_noise_around_identity_gives_unit_slope() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut x = Vec::with_capacity(10_000);
        let mut y = Vec::with_capacity(10_000);
        for i in 0..10_000 {
            let base = i as f64 / 10_000.0;
            let nx: f64 = <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
            let ny: f64 = <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
            x.push(base + 0.05 * nx);
            y.push(base + 0.05 * ny);
        }
        let (slope, _) = tls_fit(&x, &y).unwrap();
        assert!((0.9..=1.1).contains(&slope), "slope {slope}");
    }

    #[test]
    fn non_finite_pairs_are_ignored() {
        let x = vec![0.0, 1.0, f64::NAN, 2.0];
        let y = vec![1.0, 3.0, 100.0, 5.0];
        let (slope, intercept) = tls_fit(&x, &y).unwrap();
        assert_relative_eq!(slope, 2.0, max_relative = 1e-12);
        assert_relative_eq!(intercept, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_clouds_are_rejected() {
        assert!(tls_fit(&[1.0], &[2.0]).is_err());
        assert!(tls_fit(&[3.0, 3.0, 3.0], &[1.0, 1.0, 1.0]).is_err());
        assert!(tls_fit(&[1.0, 2.0], &[3.0]).is_err());
        // Vertical scatter: no representable slope.
        assert!(tls_fit(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn horizontal_scatter_has_zero_slope() {
        let (slope, intercept) = tls_fit(&[0.0, 1.0, 2.0], &[4.0, 4.0, 4.0]).unwrap();
        assert_eq!(slope, 0.0);
        assert_eq!(intercept, 4.0);
    }
}
