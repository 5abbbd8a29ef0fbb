//! Photonic layer: couplers, phase shifters, cantilever-phase-shifter MZIs
//! (single and double), multiport switch networks, photon-stream Monte
//! Carlo and g² statistics.
//!
//! Field convention: directional couplers are symmetric with `i` on the
//! cross port, `[[√(1−r), i√r], [i√r, √(1−r)]]`; phase shifters act on the
//! second rail, `diag(1, e^{iθ})`.

mod network;
mod streams;

pub use network::{
    chain_edges, compose_network, dcps_network, optimize_extinction, optimize_routing,
    ElementSpec, NetworkSpec, OptimizedExtinction, SwitchNetwork,
};
pub use streams::{
    g2_histogram, g2_zero, g2_zero_analytic, simulate_photon_streams, EmitterSource, FixedRouting,
    G2Histogram, G2Zero, PhotonRecord, Routing, DEFAULT_DETECTOR_DEAD_TIME_NS,
};

use nalgebra::Matrix2;
use num_complex::Complex64;
use thiserror::Error;

type C64 = Complex64;

#[derive(Debug, Error, PartialEq)]
pub enum PhotonicsError {
    #[error("coupler ratio {0} outside (0, 1)")]
    RatioDomain(f64),
    #[error("network topology invalid: {0}")]
    Topology(String),
    #[error(
        "optimizer reached only {achieved_db:.1} dB on a perfect-coupler network (≥ {expected_db} dB expected)"
    )]
    OptimizationShortfall { achieved_db: f64, expected_db: f64 },
    #[error("not enough coincidences in the plateau ({found}; need ≥ {need})")]
    Statistics { found: u64, need: u64 },
}

/// 2×2 complex field-amplitude transfer matrix of a passive element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m: Matrix2<C64>,
}

impl TransferMatrix {
    pub fn identity() -> TransferMatrix {
        TransferMatrix {
            m: Matrix2::identity(),
        }
    }

    /// Matrix product: `self` applied after `first`.
    pub fn after(&self, first: &TransferMatrix) -> TransferMatrix {
        TransferMatrix { m: self.m * first.m }
    }

    /// Max-abs deviation of M†M from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.m.adjoint() * self.m - Matrix2::identity();
        d.iter().fold(0.0f64, |a, v| a.max(v.norm()))
    }

    /// Largest singular value (≤ 1 + tol for passive elements).
    pub fn max_singular_value(&self) -> f64 {
        let g = self.m.adjoint() * self.m;
        // eigenvalues of the 2×2 Hermitian Gram matrix
        let a = g[(0, 0)].re;
        let d = g[(1, 1)].re;
        let b2 = g[(0, 1)].norm_sqr();
        let tr = a + d;
        let disc = ((a - d) * (a - d) / 4.0 + b2).sqrt();
        (tr / 2.0 + disc).sqrt()
    }

    /// Power transmitted from input port to output port.
    pub fn power(&self, output: usize, input: usize) -> f64 {
        self.m[(output, input)].norm_sqr()
    }
}

/// Directional coupler with power fraction `ratio` on the cross port.
/// The degenerate endpoints are allowed: ratio 0 is the bar state
/// (identity), ratio 1 the full cross.
pub fn coupler(ratio: f64) -> Result<TransferMatrix, PhotonicsError> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(PhotonicsError::RatioDomain(ratio));
    }
    let t = C64::from((1.0 - ratio).sqrt());
    let k = C64::new(0.0, ratio.sqrt());
    Ok(TransferMatrix {
        m: Matrix2::new(t, k, k, t),
    })
}

/// Phase shifter on the second rail: diag(1, e^{iθ}).
pub fn phase_shifter(theta: f64) -> TransferMatrix {
    TransferMatrix {
        m: Matrix2::new(
            C64::from(1.0),
            C64::from(0.0),
            C64::from(0.0),
            C64::from_polar(1.0, theta),
        ),
    }
}

/// Single cantilever-phase-shifter MZI: coupler(r2) · phase(θ) · coupler(r1).
pub fn mzi(theta: f64, r1: f64, r2: f64) -> Result<TransferMatrix, PhotonicsError> {
    Ok(coupler(r2)?.after(&phase_shifter(theta)).after(&coupler(r1)?))
}

/// Double cps-MZI: two cascaded single-shifter MZIs (θ then φ); the second
/// phase compensates imperfect coupler ratios for high-contrast switching.
pub fn dcps_mzi(theta: f64, phi: f64, ratios: [f64; 4]) -> Result<TransferMatrix, PhotonicsError> {
    let first = mzi(theta, ratios[0], ratios[1])?;
    let second = mzi(phi, ratios[2], ratios[3])?;
    Ok(second.after(&first))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupler_cases() {
        let half = coupler(0.5).unwrap();
        assert!((half.m[(0, 0)].re - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((half.m[(0, 1)].im - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(half.unitarity_defect() < 1e-12);

        // bar-state limit
        let bar = coupler(0.0).unwrap();
        assert!((bar.m - Matrix2::identity()).iter().all(|v| v.norm() < 1e-15));

        assert!(matches!(coupler(-0.1), Err(PhotonicsError::RatioDomain(_))));
        assert!(matches!(coupler(1.1), Err(PhotonicsError::RatioDomain(_))));

        let mut s = crate::rng::Stream::new(4, 0);
        for _ in 0..200 {
            let c = coupler(s.uniform(1e-3, 1.0 - 1e-3)).unwrap();
            assert!(c.unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn phase_shifter_cases() {
        assert!(phase_shifter(0.0).m == Matrix2::identity());
        let full = phase_shifter(std::f64::consts::TAU);
        assert!((full.m - Matrix2::identity()).iter().all(|v| v.norm() < 1e-12));
        let pi = phase_shifter(std::f64::consts::PI);
        assert!((pi.m[(1, 1)].re + 1.0).abs() < 1e-12);
        assert!(pi.m[(1, 1)].im.abs() < 1e-12);
    }

    #[test]
    fn balanced_mzi_cross_and_bar() {
        let cross = mzi(0.0, 0.5, 0.5).unwrap();
        assert!((cross.power(1, 0) - 1.0).abs() < 1e-12);
        assert!(cross.power(0, 0) < 1e-12);

        let bar = mzi(std::f64::consts::PI, 0.5, 0.5).unwrap();
        assert!((bar.power(0, 0) - 1.0).abs() < 1e-12);
        assert!(bar.power(1, 0) < 1e-12);
    }

    #[test]
    fn imperfect_mzi_has_finite_cross_extinction() {
        // grid-search oracle at 1e-4 radian steps
        let (r1, r2) = (0.45, 0.55);
        let mut min_p = f64::INFINITY;
        let mut max_p: f64 = 0.0;
        let mut theta = 0.0;
        while theta < std::f64::consts::TAU {
            let p = mzi(theta, r1, r2).unwrap().power(1, 0);
            min_p = min_p.min(p);
            max_p = max_p.max(p);
            theta += 1e-4;
        }
        // analytic floor: (√(r1(1−r2)) − √(r2(1−r1)))²
        let floor = ((r1 * (1.0 - r2)).sqrt() - (r2 * (1.0 - r1)).sqrt()).powi(2);
        assert!((min_p - floor).abs() < 1e-6, "min {min_p} vs floor {floor}");
        let ext = 10.0 * (max_p / min_p).log10();
        assert!(ext.is_finite() && ext < 60.0, "single-MZI ceiling {ext} dB");
    }

    #[test]
    fn dcps_composition_and_passivity() {
        let all_half = [0.5, 0.5, 0.5, 0.5];
        let barbar = dcps_mzi(std::f64::consts::PI, std::f64::consts::PI, all_half).unwrap();
        assert!((barbar.power(0, 0) - 1.0).abs() < 1e-12);

        let mut s = crate::rng::Stream::new(12, 0);
        for _ in 0..200 {
            let ratios = [
                s.uniform(0.3, 0.7),
                s.uniform(0.3, 0.7),
                s.uniform(0.3, 0.7),
                s.uniform(0.3, 0.7),
            ];
            let theta = s.uniform(0.0, std::f64::consts::TAU);
            let phi = s.uniform(0.0, std::f64::consts::TAU);
            let m = dcps_mzi(theta, phi, ratios).unwrap();
            assert!(m.unitarity_defect() < 1e-12);
            assert!(m.max_singular_value() <= 1.0 + 1e-12);
            // reciprocity: forward transfer equals the transpose of the
            // reversed cascade (each element is itself symmetric)
            let reversed = coupler(ratios[0])
                .unwrap()
                .after(&phase_shifter(theta))
                .after(&coupler(ratios[1]).unwrap())
                .after(&coupler(ratios[2]).unwrap())
                .after(&phase_shifter(phi))
                .after(&coupler(ratios[3]).unwrap());
            for r in 0..2 {
                for c in 0..2 {
                    assert!((m.m[(r, c)] - reversed.m[(c, r)]).norm() < 1e-12);
                }
            }
        }
    }
}
