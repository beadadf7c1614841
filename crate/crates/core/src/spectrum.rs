//! Spectral densities of the incoherent photon field: the Planck
//! distribution n(omega) = omega^3 / (pi^2 (e^{beta omega} - 1)), optional
//! multiplicative Gaussian filtering, and a tail-bounded check that the
//! total density integral is finite. Units: hbar = c = k_B = 1.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianFilter<T> {
    pub center: T,
    pub variance: T,
}

impl<T: Real> GaussianFilter<T> {
    pub fn new(center: T, variance: T) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::NonFinite {
                context: "filter center",
            });
        }
        if !variance.is_finite() || variance <= T::zero() {
            return Err(Error::NotPositiveParameter {
                what: "filter variance",
                value: variance.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(GaussianFilter { center, variance })
    }

    fn weight(&self, omega: T) -> T {
        let d = omega - self.center;
        (-d * d / (self.variance + self.variance)).exp()
    }
}

/// Photon density rule omega -> n(omega), a Planck curve with an optional
/// Gaussian window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralDensity<T> {
    pub beta: T,
    pub filter: Option<GaussianFilter<T>>,
}

impl<T: Real> SpectralDensity<T> {
    pub fn planck(beta: T) -> Result<Self> {
        check_beta(beta)?;
        Ok(SpectralDensity { beta, filter: None })
    }

    pub fn filtered(beta: T, filter: GaussianFilter<T>) -> Result<Self> {
        check_beta(beta)?;
        Ok(SpectralDensity {
            beta,
            filter: Some(filter),
        })
    }

    pub fn eval(&self, omega: T) -> Result<T> {
        let base = planck_density(omega, self.beta)?;
        Ok(match &self.filter {
            Some(f) => base * f.weight(omega),
            None => base,
        })
    }
}

fn check_beta<T: Real>(beta: T) -> Result<()> {
    if !beta.is_finite() || beta <= T::zero() {
        return Err(Error::NotPositiveParameter {
            what: "inverse temperature",
            value: beta.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Planck density omega^3 / (pi^2 (e^{beta omega} - 1)). Continuous at the
/// origin: the omega -> 0+ limit omega^2/(pi^2 beta) vanishes, so grids that
/// include 0 evaluate to 0 there. Frequencies below 0 are rejected.
pub fn planck_density<T: Real>(omega: T, beta: T) -> Result<T> {
    check_beta(beta)?;
    if !omega.is_finite() || omega < T::zero() {
        return Err(Error::NegativeFrequency {
            value: omega.to_f64().unwrap_or(f64::NAN),
        });
    }
    if omega == T::zero() {
        return Ok(T::zero());
    }
    let pi2 = T::PI() * T::PI();
    Ok(omega * omega * omega / (pi2 * (beta * omega).exp_m1()))
}

/// Planck density times the window exp(-(omega - center)^2 / (2 variance)).
pub fn filtered_density<T: Real>(omega: T, beta: T, center: T, variance: T) -> Result<T> {
    let filter = GaussianFilter::new(center, variance)?;
    Ok(planck_density(omega, beta)? * filter.weight(omega))
}

/// Trapezoid integral of the density over [0, omega_max] plus an analytic
/// bound on the tail: for omega >= Omega,
/// n(omega) <= omega^3 e^{-beta omega} / (pi^2 (1 - e^{-beta Omega})), whose
/// integral is e^{-beta Omega} (Omega^3/beta + 3 Omega^2/beta^2 +
/// 6 Omega/beta^3 + 6/beta^4) / (pi^2 (1 - e^{-beta Omega})). The window
/// never exceeds 1, so the bound also covers filtered densities. Errors when
/// the bound exceeds 1% of the integral (omega_max too small to claim
/// convergence).
pub fn total_density<T: Real>(
    density: &SpectralDensity<T>,
    omega_max: T,
    nodes: usize,
) -> Result<T> {
    if !omega_max.is_finite() || omega_max <= T::zero() {
        return Err(Error::NotPositiveParameter {
            what: "integration cutoff",
            value: omega_max.to_f64().unwrap_or(f64::NAN),
        });
    }
    if nodes < 2 {
        return Err(Error::InvalidConfig(
            "total_density needs at least 2 nodes".into(),
        ));
    }
    let h = omega_max / T::from_usize(nodes - 1).unwrap();
    let mut integral = T::zero();
    let half = T::of(0.5);
    for i in 0..nodes {
        let omega = if i == nodes - 1 {
            omega_max
        } else {
            h * T::from_usize(i).unwrap()
        };
        let weight = if i == 0 || i == nodes - 1 {
            half
        } else {
            T::one()
        };
        integral = integral + density.eval(omega)? * weight;
    }
    integral = integral * h;

    let beta = density.beta;
    let pi2 = T::PI() * T::PI();
    let big = omega_max;
    let decay = (-beta * big).exp();
    let b2 = beta * beta;
    let three = T::of(3.0);
    let six = T::of(6.0);
    let poly =
        big * big * big / beta + three * big * big / b2 + six * big / (b2 * beta) + six / (b2 * b2);
    let tail = decay * poly / (pi2 * (T::one() - decay));

    // the absolute floor keeps negligible-density cases (far-detuned
    // filters) from tripping the relative test against an integral of ~0
    if tail > T::of(0.01) * integral + T::of(1e-12) {
        return Err(Error::TailBound {
            bound: tail.to_f64().unwrap_or(f64::NAN),
            integral: integral.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(integral + tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn planck_vanishes_at_zero_and_rejects_negative() {
        assert_eq!(planck_density(0.0, 1.0).unwrap(), 0.0);
        assert!(planck_density(-0.1, 1.0).is_err());
        assert!(planck_density(f64::NAN, 1.0).is_err());
        assert!(planck_density(1.0, 0.0).is_err());
        assert!(planck_density(1.0, -2.0).is_err());
        // small-omega behaviour follows the series limit omega^2/(pi^2 beta)
        let omega = 1e-8;
        let series = omega * omega / (std::f64::consts::PI.powi(2) * 2.0);
        assert_relative_eq!(
            planck_density(omega, 2.0).unwrap(),
            series,
            max_relative = 1e-7
        );
    }

    #[test]
    fn planck_peak_sits_at_the_stationarity_root() {
        // d/domega [omega^3/(e^omega - 1)] = 0  <=>  3(1 - e^-omega) = omega
        let g = |w: f64| 3.0 * (1.0 - (-w).exp()) - w;
        let (mut lo, mut hi) = (2.0, 4.0);
        assert!(g(lo) > 0.0 && g(hi) < 0.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        assert!((root - 2.8214).abs() < 5e-4, "root {root}");
        let peak = planck_density(root, 1.0).unwrap();
        assert!(peak > planck_density(root - 0.05, 1.0).unwrap());
        assert!(peak > planck_density(root + 0.05, 1.0).unwrap());
    }

    #[test]
    fn hotter_curve_dominates_pointwise() {
        for i in 1..=200 {
            let omega = 0.1 * i as f64;
            let hot = planck_density(omega, 0.8).unwrap();
            let cold = planck_density(omega, 1.0).unwrap();
            assert!(hot > cold, "omega {omega}");
            assert!(cold >= 0.0);
        }
    }

    #[test]
    fn filter_peaks_at_center_and_suppresses_tails() {
        let beta = 0.8_f64;
        let center = 5.0;
        let variance = 1.0;
        assert_eq!(
            filtered_density(center, beta, center, variance).unwrap(),
            planck_density(center, beta).unwrap()
        );
        let omega = center + 6.0 * variance.sqrt();
        let ratio = filtered_density(omega, beta, center, variance).unwrap()
            / planck_density(omega, beta).unwrap();
        assert!(ratio < 2e-8, "ratio {ratio:e}");
        // pointwise domination
        for i in 0..=120 {
            let omega = 0.1 * i as f64;
            assert!(
                filtered_density(omega, beta, center, variance).unwrap()
                    <= planck_density(omega, beta).unwrap()
            );
        }
    }

    #[test]
    fn filtered_curve_is_a_single_bump_near_center() {
        let density =
            SpectralDensity::filtered(0.8, GaussianFilter::new(5.0, 1.0).unwrap()).unwrap();
        let samples: Vec<f64> = (0..=240)
            .map(|i| density.eval(0.05 * i as f64).unwrap())
            .collect();
        let argmax = samples
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let peak_omega = 0.05 * argmax as f64;
        assert!((4.0..6.0).contains(&peak_omega), "peak at {peak_omega}");
        // rises before the peak region and falls after it
        assert!(samples[20] < samples[argmax] && samples[220] < samples[argmax] / 1e3);
    }

    #[test]
    fn total_density_recovers_the_zeta_integral() {
        // int_0^inf omega^3/(e^omega - 1) domega = pi^4/15
        let density = SpectralDensity::planck(1.0).unwrap();
        let expect = std::f64::consts::PI.powi(2) / 15.0;
        let total = total_density(&density, 50.0, 2001).unwrap();
        assert_relative_eq!(total, expect, max_relative = 5e-3);
        // doubling the node count moves the result by well under 0.1%
        let finer = total_density(&density, 50.0, 4001).unwrap();
        assert!((finer - total).abs() / total < 1e-3);
    }

    #[test]
    fn filtered_total_is_dominated_and_far_detuned_is_zero() {
        let planck = SpectralDensity::planck(1.0).unwrap();
        let filtered =
            SpectralDensity::filtered(1.0, GaussianFilter::new(5.0, 1.0).unwrap()).unwrap();
        let unfiltered_total = total_density(&planck, 50.0, 2001).unwrap();
        let filtered_total = total_density(&filtered, 50.0, 2001).unwrap();
        assert!(filtered_total <= unfiltered_total);

        let detuned =
            SpectralDensity::<f64>::filtered(1.0, GaussianFilter::new(200.0, 1.0).unwrap())
                .unwrap();
        let zero_total = total_density(&detuned, 50.0, 2001).unwrap();
        assert!(zero_total.abs() < 1e-12, "total {zero_total:e}");
    }

    #[test]
    fn total_density_flags_a_cutoff_that_is_too_small() {
        let density = SpectralDensity::planck(1.0).unwrap();
        let err = total_density(&density, 0.1, 100).unwrap_err();
        assert!(matches!(err, Error::TailBound { .. }), "{err}");
        assert!(total_density(&density, 50.0, 1).is_err());
        assert!(total_density(&density, 0.0, 100).is_err());
        assert!(total_density(&density, -1.0, 100).is_err());
    }

    #[test]
    fn densities_are_nonnegative_on_grids() {
        let planck = SpectralDensity::planck(0.8).unwrap();
        let filtered =
            SpectralDensity::filtered(0.8, GaussianFilter::new(5.0, 1.0).unwrap()).unwrap();
        for i in 0..=500 {
            let omega = 0.04 * i as f64;
            assert!(planck.eval(omega).unwrap() >= 0.0);
            assert!(filtered.eval(omega).unwrap() >= 0.0);
        }
    }

    #[test]
    fn filter_validation() {
        assert!(GaussianFilter::new(5.0, 0.0).is_err());
        assert!(GaussianFilter::new(5.0, -1.0).is_err());
        assert!(GaussianFilter::new(f64::INFINITY, 1.0).is_err());
        assert!(SpectralDensity::planck(f64::NAN).is_err());
    }
}
