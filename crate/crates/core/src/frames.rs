//! Strain tensors and the rotations between the device frame
//! (X=\[110\], Y=\[1̄10\], Z=\[001\]) and the internal frame of each SnV
//! orientation class.
//!
//! Crystal directions are kept as exact integer Miller triples; normalization
//! happens only when a rotation is built, so repeated frame constructions do
//! not accumulate float drift.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Orthogonality / determinant tolerance for rotations.
pub const ROTATION_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum FrameError {
    #[error("directions are not perpendicular (|cos| = {dot:.3e})")]
    Perpendicularity { dot: f64 },
    #[error("degenerate (zero) crystal direction")]
    DegenerateDirection,
    #[error("dipole axis {0:?} is not a ⟨111⟩ direction")]
    UnsupportedOrientation([i32; 3]),
    #[error("strain magnitude {0:.3e} outside the linear-elastic guard (|ε| < 0.01)")]
    StrainRange(f64),
    #[error("strain tensor is in frame {found:?}, expected {expected:?}")]
    FrameMismatch { expected: Frame, found: Frame },
}

/// Frame tag carried by every strain tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Frame {
    Device,
    SnvAxial,
    SnvTransverse,
}

impl Frame {
    pub fn is_snv(self) -> bool {
        matches!(self, Frame::SnvAxial | Frame::SnvTransverse)
    }
}

/// Crystal direction as an exact integer Miller triple, e.g. (1,1,1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrystalDirection(pub i32, pub i32, pub i32);

impl CrystalDirection {
    pub fn as_array(&self) -> [i32; 3] {
        [self.0, self.1, self.2]
    }

    pub fn is_zero(&self) -> bool {
        self.0 == 0 && self.1 == 0 && self.2 == 0
    }

    /// Unit vector in cubic-crystal coordinates.
    pub fn unit(&self) -> Result<Vector3<f64>, FrameError> {
        if self.is_zero() {
            return Err(FrameError::DegenerateDirection);
        }
        let v = Vector3::new(self.0 as f64, self.1 as f64, self.2 as f64);
        Ok(v / v.norm())
    }

    /// True if the direction lies in the ⟨111⟩ family (up to sign).
    pub fn is_111_family(&self) -> bool {
        let [a, b, c] = self.as_array();
        a.abs() == b.abs() && b.abs() == c.abs() && a != 0
    }

    fn dot(&self, other: &CrystalDirection) -> i32 {
        self.0 * other.0 + self.1 * other.1 + self.2 * other.2
    }
}

/// Device X = \[110\]: the uniaxial strain direction in the quantum microchip.
pub const DEVICE_X: CrystalDirection = CrystalDirection(1, 1, 0);
/// Device Y = \[1̄10\].
pub const DEVICE_Y: CrystalDirection = CrystalDirection(-1, 1, 0);
/// Device Z = \[001\]: the cantilever deflection direction.
pub const DEVICE_Z: CrystalDirection = CrystalDirection(0, 0, 1);

/// Proper rotation mapping cubic-crystal coordinates into a target frame;
/// rows are the target frame's axes expressed in cubic coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRotation {
    matrix: Matrix3<f64>,
}

impl FrameRotation {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    /// R_b · R_aᵀ: maps frame-a coordinates to frame-b coordinates.
    pub fn then_from(&self, a: &FrameRotation) -> FrameRotation {
        FrameRotation {
            matrix: self.matrix * a.matrix.transpose(),
        }
    }

    /// Composition R_second · R_first.
    pub fn compose(&self, first: &FrameRotation) -> FrameRotation {
        FrameRotation {
            matrix: self.matrix * first.matrix,
        }
    }

    /// Inverse rotation (the transpose, for a proper rotation).
    pub fn inverse(&self) -> FrameRotation {
        FrameRotation {
            matrix: self.matrix.transpose(),
        }
    }

    /// Max-abs deviation of RᵀR from the identity.
    pub fn orthogonality_defect(&self) -> f64 {
        let d = self.matrix.transpose() * self.matrix - Matrix3::identity();
        d.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }
}

/// Build the rotation whose rows are (normalized x, z×x, z).
///
/// Maps cubic-coordinate vectors into the frame with the given z and x axes.
pub fn rotation_from_axes(
    z: CrystalDirection,
    x: CrystalDirection,
) -> Result<FrameRotation, FrameError> {
    let zu = z.unit()?;
    let xu = x.unit()?;
    let dot = zu.dot(&xu);
    if dot.abs() >= ROTATION_TOL {
        return Err(FrameError::Perpendicularity { dot });
    }
    let yu = zu.cross(&xu);
    Ok(FrameRotation {
        matrix: Matrix3::from_rows(&[xu.transpose(), yu.transpose(), zu.transpose()]),
    })
}

/// Rotation from cubic coordinates into the device frame.
pub fn device_rotation() -> FrameRotation {
    rotation_from_axes(DEVICE_Z, DEVICE_X).expect("device axes are perpendicular")
}

/// Symmetric dimensionless strain with an explicit frame tag.
#[derive(Debug, Clone, PartialEq)]
pub struct StrainTensor {
    components: Matrix3<f64>,
    frame: Frame,
}

/// Symmetry tolerance for strain tensors.
pub const SYMMETRY_TOL: f64 = 1e-15;

impl StrainTensor {
    /// Wrap a symmetric matrix; the input is symmetrized exactly so that
    /// downstream arithmetic cannot break the invariant.
    pub fn new(components: Matrix3<f64>, frame: Frame) -> StrainTensor {
        let sym = (components + components.transpose()) * 0.5;
        StrainTensor {
            components: sym,
            frame,
        }
    }

    pub fn zero(frame: Frame) -> StrainTensor {
        StrainTensor {
            components: Matrix3::zeros(),
            frame,
        }
    }

    /// From Voigt order \[xx, yy, zz, yz, xz, xy\].
    pub fn from_voigt(v: [f64; 6], frame: Frame) -> StrainTensor {
        let [xx, yy, zz, yz, xz, xy] = v;
        StrainTensor {
            components: Matrix3::new(xx, xy, xz, xy, yy, yz, xz, yz, zz),
            frame,
        }
    }

    /// To Voigt order \[xx, yy, zz, yz, xz, xy\].
    pub fn to_voigt(&self) -> [f64; 6] {
        let m = &self.components;
        [m[(0, 0)], m[(1, 1)], m[(2, 2)], m[(1, 2)], m[(0, 2)], m[(0, 1)]]
    }

    pub fn components(&self) -> &Matrix3<f64> {
        &self.components
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn trace(&self) -> f64 {
        self.components.trace()
    }

    /// Largest |component|.
    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn xx(&self) -> f64 {
        self.components[(0, 0)]
    }
    pub fn yy(&self) -> f64 {
        self.components[(1, 1)]
    }
    pub fn zz(&self) -> f64 {
        self.components[(2, 2)]
    }
    pub fn yz(&self) -> f64 {
        self.components[(1, 2)]
    }
    pub fn xz(&self) -> f64 {
        self.components[(0, 2)]
    }
    pub fn xy(&self) -> f64 {
        self.components[(0, 1)]
    }

    pub fn scale(&self, factor: f64) -> StrainTensor {
        StrainTensor {
            components: self.components * factor,
            frame: self.frame,
        }
    }
}

/// ε' = R ε Rᵀ with the frame label updated.
pub fn transform_strain(eps: &StrainTensor, rotation: &FrameRotation, frame: Frame) -> StrainTensor {
    let m = rotation.matrix * eps.components * rotation.matrix.transpose();
    StrainTensor::new(m, frame)
}

/// Orientation class of an SnV dipole axis relative to the device X=\[110\]
/// strain direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrientationClass {
    Axial,
    Transverse,
}

/// One SnV orientation: dipole axis (a ⟨111⟩ direction) plus the
/// deterministic in-plane x' axis choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnVOrientation {
    pub class: OrientationClass,
    pub dipole_axis: CrystalDirection,
    pub x_axis_choice: CrystalDirection,
}

impl SnVOrientation {
    pub fn frame(&self) -> Frame {
        match self.class {
            OrientationClass::Axial => Frame::SnvAxial,
            OrientationClass::Transverse => Frame::SnvTransverse,
        }
    }

    /// Rotation from cubic coordinates into this SnV's primed frame.
    pub fn rotation(&self) -> FrameRotation {
        rotation_from_axes(self.dipole_axis, self.x_axis_choice)
            .expect("x' axis is perpendicular by construction")
    }

    /// Rotation taking device-frame components into this SnV's frame.
    pub fn device_to_snv(&self) -> FrameRotation {
        self.rotation().then_from(&device_rotation())
    }

    /// Express a device-frame strain tensor in this SnV's frame.
    pub fn strain_in_snv_frame(&self, eps: &StrainTensor) -> Result<StrainTensor, FrameError> {
        if eps.frame() != Frame::Device {
            return Err(FrameError::FrameMismatch {
                expected: Frame::Device,
                found: eps.frame(),
            });
        }
        Ok(transform_strain(eps, &self.device_to_snv(), self.frame()))
    }
}

/// Classify a ⟨111⟩ dipole direction as axial or transverse and fix its
/// x' axis deterministically.
///
/// Axial means the dipole has a nonzero projection on device X=\[110\]. The
/// x' axis is the projection of device X onto the plane perpendicular to the
/// dipole (kept as the exact integer triple `3·X − (X·d)·d`); if that
/// projection vanishes the \[1̄10\]-derived axis is used instead.
pub fn classify_orientation(dipole: CrystalDirection) -> Result<SnVOrientation, FrameError> {
    if !dipole.is_111_family() {
        return Err(FrameError::UnsupportedOrientation(dipole.as_array()));
    }
    let along_x = dipole.dot(&DEVICE_X);
    let class = if along_x != 0 {
        OrientationClass::Axial
    } else {
        OrientationClass::Transverse
    };
    let x_axis_choice = project_perpendicular(DEVICE_X, dipole)
        .or_else(|| project_perpendicular(DEVICE_Y, dipole))
        .ok_or(FrameError::DegenerateDirection)?;
    Ok(SnVOrientation {
        class,
        dipole_axis: dipole,
        x_axis_choice,
    })
}

/// Integer projection of `v` onto the plane perpendicular to `axis`:
/// |axis|²·v − (v·axis)·axis, reduced by the gcd. None if it vanishes.
fn project_perpendicular(v: CrystalDirection, axis: CrystalDirection) -> Option<CrystalDirection> {
    let n2 = axis.dot(&axis);
    let d = v.dot(&axis);
    let p = [
        n2 * v.0 - d * axis.0,
        n2 * v.1 - d * axis.1,
        n2 * v.2 - d * axis.2,
    ];
    if p == [0, 0, 0] {
        return None;
    }
    let g = p.iter().fold(0i32, |acc, &x| gcd(acc, x.abs()));
    Some(CrystalDirection(p[0] / g, p[1] / g, p[2] / g))
}

fn gcd(a: i32, b: i32) -> i32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Device-frame tensor for uniaxial strain along X, with an optional
/// transverse Poisson contraction.
///
/// The guard |ε| < 0.01 keeps the model inside the linear-elastic regime.
pub fn uniaxial_device_strain(
    magnitude: f64,
    poisson_ratio: f64,
) -> Result<StrainTensor, FrameError> {
    if !magnitude.is_finite() || magnitude.abs() >= 0.01 {
        return Err(FrameError::StrainRange(magnitude));
    }
    let t = -poisson_ratio * magnitude;
    Ok(StrainTensor::new(
        Matrix3::from_diagonal(&Vector3::new(magnitude, t, t)),
        Frame::Device,
    ))
}

/// The four distinct ⟨111⟩ dipole axes (up to sign).
pub fn all_111_axes() -> [CrystalDirection; 4] {
    [
        CrystalDirection(1, 1, 1),
        CrystalDirection(1, 1, -1),
        CrystalDirection(1, -1, 1),
        CrystalDirection(-1, 1, 1),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    #[test]
    fn rotation_identity_case() {
        let r = rotation_from_axes(CrystalDirection(0, 0, 1), CrystalDirection(1, 0, 0)).unwrap();
        assert!((r.matrix() - Matrix3::identity()).norm() < 1e-15);
    }

    #[test]
    fn rotation_111_row_construction() {
        let r = rotation_from_axes(CrystalDirection(1, 1, 1), CrystalDirection(1, -1, 0)).unwrap();
        let third = r.matrix().row(2);
        let s = 1.0 / 3f64.sqrt();
        assert_close(third[0], s, 1e-15);
        assert_close(third[1], s, 1e-15);
        assert_close(third[2], s, 1e-15);
        assert!(r.orthogonality_defect() < ROTATION_TOL);
        assert_close(r.determinant(), 1.0, ROTATION_TOL);
    }

    #[test]
    fn rotation_rejects_non_perpendicular() {
        let err = rotation_from_axes(CrystalDirection(1, 1, 1), CrystalDirection(1, 1, 0));
        assert!(matches!(err, Err(FrameError::Perpendicularity { .. })));
    }

    #[test]
    fn rotation_rejects_zero_direction() {
        let err = rotation_from_axes(CrystalDirection(0, 0, 0), CrystalDirection(1, 0, 0));
        assert_eq!(err, Err(FrameError::DegenerateDirection));
    }

    #[test]
    fn transform_identity_leaves_strain() {
        let eps = uniaxial_device_strain(1e-4, 0.0).unwrap();
        let id = rotation_from_axes(CrystalDirection(0, 0, 1), CrystalDirection(1, 0, 0)).unwrap();
        let out = transform_strain(&eps, &id, Frame::Device);
        assert!((out.components() - eps.components()).norm() < 1e-18);
    }

    #[test]
    fn axial_projection_gives_two_thirds() {
        // uniaxial device-X strain seen by an axial [111] SnV: ε_z'z' = (2/3)ε
        let eps = uniaxial_device_strain(3e-4, 0.0).unwrap();
        let snv = classify_orientation(CrystalDirection(1, 1, 1)).unwrap();
        assert_eq!(snv.class, OrientationClass::Axial);
        let local = snv.strain_in_snv_frame(&eps).unwrap();
        assert_close(local.zz(), 2e-4, 1e-17);
        assert_close(local.trace(), 3e-4, 1e-17);
    }

    #[test]
    fn transverse_projection_gives_zero_zz() {
        let eps = uniaxial_device_strain(3e-4, 0.0).unwrap();
        let snv = classify_orientation(CrystalDirection(1, -1, 1)).unwrap();
        assert_eq!(snv.class, OrientationClass::Transverse);
        let local = snv.strain_in_snv_frame(&eps).unwrap();
        assert_close(local.zz(), 0.0, 1e-18);
    }

    #[test]
    fn classify_axial_and_unsupported() {
        assert_eq!(
            classify_orientation(CrystalDirection(1, 1, 1)).unwrap().class,
            OrientationClass::Axial
        );
        // (-1,-1,1) is [11̄1] up to sign: nonzero projection on [110], axial.
        assert_eq!(
            classify_orientation(CrystalDirection(-1, -1, 1)).unwrap().class,
            OrientationClass::Axial
        );
        assert!(matches!(
            classify_orientation(CrystalDirection(1, 0, 0)),
            Err(FrameError::UnsupportedOrientation(_))
        ));
    }

    #[test]
    fn four_axes_split_two_and_two() {
        let classes: Vec<_> = all_111_axes()
            .iter()
            .map(|&d| classify_orientation(d).unwrap().class)
            .collect();
        let axial = classes
            .iter()
            .filter(|c| **c == OrientationClass::Axial)
            .count();
        assert_eq!(axial, 2);
        assert_eq!(classes.len() - axial, 2);
    }

    #[test]
    fn x_axis_choices_are_perpendicular_integer_triples() {
        for d in all_111_axes() {
            let o = classify_orientation(d).unwrap();
            assert_eq!(o.dipole_axis.dot(&o.x_axis_choice), 0);
            let r = o.rotation();
            assert!(r.orthogonality_defect() < ROTATION_TOL);
            assert_close(r.determinant(), 1.0, ROTATION_TOL);
        }
        // documented default choices
        let axial = classify_orientation(CrystalDirection(1, 1, 1)).unwrap();
        assert_eq!(axial.x_axis_choice, CrystalDirection(1, 1, -2));
        let trans = classify_orientation(CrystalDirection(1, -1, 1)).unwrap();
        assert_eq!(trans.x_axis_choice, CrystalDirection(1, 1, 0));
    }

    #[test]
    fn uniaxial_strain_examples() {
        let zero = uniaxial_device_strain(0.0, 0.0).unwrap();
        assert_eq!(zero.max_abs(), 0.0);

        let plain = uniaxial_device_strain(1e-4, 0.0).unwrap();
        assert_eq!(plain.to_voigt(), [1e-4, 0.0, 0.0, 0.0, 0.0, 0.0]);

        let poisson = uniaxial_device_strain(1e-4, 0.069).unwrap();
        let v = poisson.to_voigt();
        assert_close(v[0], 1e-4, 1e-19);
        assert_close(v[1], -6.9e-6, 1e-19);
        assert_close(v[2], -6.9e-6, 1e-19);

        assert!(matches!(
            uniaxial_device_strain(0.02, 0.0),
            Err(FrameError::StrainRange(_))
        ));
    }

    fn random_symmetric(s: &mut Stream) -> StrainTensor {
        let mut m = Matrix3::zeros();
        for i in 0..3 {
            for j in i..3 {
                let v = s.uniform(-1e-3, 1e-3);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        StrainTensor::new(m, Frame::Device)
    }

    fn random_rotation(s: &mut Stream) -> FrameRotation {
        // rotation from random axis-angle
        loop {
            let v = Vector3::new(s.normal(), s.normal(), s.normal());
            if v.norm() < 1e-6 {
                continue;
            }
            let axis = nalgebra::Unit::new_normalize(v);
            let angle = s.uniform(0.0, std::f64::consts::TAU);
            let m = nalgebra::Rotation3::from_axis_angle(&axis, angle);
            return FrameRotation {
                matrix: *m.matrix(),
            };
        }
    }

    #[test]
    fn transform_preserves_trace_and_eigenvalues() {
        let mut s = Stream::new(2024, 0);
        for _ in 0..1000 {
            let eps = random_symmetric(&mut s);
            let r = random_rotation(&mut s);
            let out = transform_strain(&eps, &r, Frame::Device);
            let tr0 = eps.trace();
            let rel = if tr0.abs() > 1e-30 {
                ((out.trace() - tr0) / tr0).abs()
            } else {
                (out.trace() - tr0).abs()
            };
            assert!(rel < 1e-12, "trace drift {rel}");

            let mut e0: Vec<f64> = eps
                .components()
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .collect();
            let mut e1: Vec<f64> = out
                .components()
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .collect();
            e0.sort_by(|a, b| a.partial_cmp(b).unwrap());
            e1.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (a, b) in e0.iter().zip(&e1) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transform_composition_matches_composed_rotation() {
        let mut s = Stream::new(99, 0);
        for _ in 0..200 {
            let eps = random_symmetric(&mut s);
            let r1 = random_rotation(&mut s);
            let r2 = random_rotation(&mut s);
            let a = transform_strain(
                &transform_strain(&eps, &r1, Frame::Device),
                &r2,
                Frame::Device,
            );
            let b = transform_strain(&eps, &r2.compose(&r1), Frame::Device);
            assert!((a.components() - b.components()).norm() < 1e-12);
        }
    }

    #[test]
    fn voigt_round_trip() {
        let v = [1e-4, -2e-5, 3e-6, 4e-7, -5e-8, 6e-9];
        let t = StrainTensor::from_voigt(v, Frame::Device);
        assert_eq!(t.to_voigt(), v);
    }
}
