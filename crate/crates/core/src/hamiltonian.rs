//! Ground- and excited-manifold Hamiltonians of an SnV under strain,
//! pre-strain and magnetic field.
//!
//! Each manifold is a 4×4 Hermitian matrix (GHz) over the ordered basis
//! {e_x↑, e_x↓, e_y↑, e_y↓}. The model is the standard group-IV one:
//!
//! ```text
//! H = H_SO + H_strain + H_Zeeman
//! H_SO     = -λ (L_z ⊗ S_z)                 L_z = σ_y over {e_x, e_y}
//! H_strain = ε_A1 I + ε_Egx (σ_z ⊗ I) + ε_Egy (σ_x ⊗ I)
//! H_Zeeman = γ_s (B·S) ⊗ I_orb + q γ_L B_z' L_z,   γ_L = γ_s / 2
//! ```
//!
//! with the symmetry-decomposed strain energies (susceptibilities in
//! PHz/strain, energies in GHz)
//!
//! ```text
//! ε_A1  = t_par ε_z'z' + t_perp (ε_x'x' + ε_y'y')
//! ε_Egx = d (ε_x'x' - ε_y'y') + f ε_z'x' + prestrain_egx
//! ε_Egy = -2d ε_x'y'          + f ε_y'z' + prestrain_egy
//! ```
//!
//! Signs are fixed so that positive ε_z'z' with negative (t_par_u − t_par_g)
//! red-shifts the optical transitions.

use nalgebra::{Matrix2, Matrix4, Vector3, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frames::StrainTensor;

const PHZ_TO_GHZ: f64 = 1e6;
const GHZ_TO_HZ: f64 = 1e9;

type C64 = Complex64;
type CMat4 = Matrix4<C64>;

#[derive(Debug, Error, PartialEq)]
pub enum HamiltonianError {
    #[error("strain tensor is in the {0:?} frame; an SnV frame is required")]
    FrameMismatch(crate::frames::Frame),
    #[error("matrix is not Hermitian within {tol:.1e} GHz (defect {defect:.3e})")]
    NumericalHermiticity { defect: f64, tol: f64 },
    #[error("qubit states are degenerate at B = 0; g_sm is undefined without a field")]
    DegenerateQubit,
}

/// Static SnV parameters. Energies in GHz, susceptibilities in PHz/strain,
/// fields in Tesla (units embedded in the serialized names).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnVParams {
    /// Ground-state spin-orbit splitting.
    pub lambda_g_ghz: f64,
    /// Excited-state spin-orbit splitting.
    pub lambda_u_ghz: f64,
    pub t_par_g_phz: f64,
    pub t_perp_g_phz: f64,
    pub t_par_u_phz: f64,
    pub t_perp_u_phz: f64,
    pub d_g_phz: f64,
    pub f_g_phz: f64,
    pub d_u_phz: f64,
    pub f_u_phz: f64,
    /// Spin gyromagnetic ratio.
    pub gamma_s_ghz_per_t: f64,
    /// Orbital quenching factor in [0, 1].
    pub quench_q: f64,
    /// Static E_g-symmetry energy, ground manifold, along egx.
    pub prestrain_egx_ghz: f64,
    /// Static E_g-symmetry energy, ground manifold, along egy.
    pub prestrain_egy_ghz: f64,
}

impl Default for SnVParams {
    /// Literature-typical SnV defaults; only (t_par_u − t_par_g) = −0.46
    /// PHz/strain is device-specific, split symmetrically between the
    /// manifolds.
    fn default() -> Self {
        SnVParams {
            lambda_g_ghz: 850.0,
            lambda_u_ghz: 3000.0,
            t_par_g_phz: 0.23,
            t_perp_g_phz: 0.0,
            t_par_u_phz: -0.23,
            t_perp_u_phz: 0.0,
            d_g_phz: 1.0,
            f_g_phz: 1.0,
            d_u_phz: 1.0,
            f_u_phz: 1.0,
            gamma_s_ghz_per_t: 28.0,
            quench_q: 0.1,
            prestrain_egx_ghz: 0.0,
            prestrain_egy_ghz: 0.0,
        }
    }
}

impl SnVParams {
    pub fn t_par_difference_phz(&self) -> f64 {
        self.t_par_u_phz - self.t_par_g_phz
    }

    /// Pre-strain magnitude √(egx² + egy²) of the ground manifold.
    pub fn prestrain_magnitude_ghz(&self) -> f64 {
        (self.prestrain_egx_ghz.powi(2) + self.prestrain_egy_ghz.powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Manifold {
    Ground,
    Excited,
}

/// Symmetry-decomposed strain energies of one manifold, in GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrainEnergies {
    pub a1_ghz: f64,
    pub egx_ghz: f64,
    pub egy_ghz: f64,
}

impl StrainEnergies {
    pub fn eg_magnitude_ghz(&self) -> f64 {
        (self.egx_ghz.powi(2) + self.egy_ghz.powi(2)).sqrt()
    }
}

/// Project an SnV-frame strain tensor onto the A1/Eg energies of `manifold`.
/// `include_prestrain` adds the static pre-strain energies; the excited
/// manifold sees the pre-strain scaled by d_u/d_g (same static distortion,
/// manifold-specific susceptibility).
pub fn strain_energies(
    params: &SnVParams,
    manifold: Manifold,
    eps: &StrainTensor,
    include_prestrain: bool,
) -> Result<StrainEnergies, HamiltonianError> {
    if !eps.frame().is_snv() {
        return Err(HamiltonianError::FrameMismatch(eps.frame()));
    }
    let (t_par, t_perp, d, f) = match manifold {
        Manifold::Ground => (
            params.t_par_g_phz,
            params.t_perp_g_phz,
            params.d_g_phz,
            params.f_g_phz,
        ),
        Manifold::Excited => (
            params.t_par_u_phz,
            params.t_perp_u_phz,
            params.d_u_phz,
            params.f_u_phz,
        ),
    };
    let a1 = PHZ_TO_GHZ * (t_par * eps.zz() + t_perp * (eps.xx() + eps.yy()));
    let mut egx = PHZ_TO_GHZ * (d * (eps.xx() - eps.yy()) + f * eps.xz());
    let mut egy = PHZ_TO_GHZ * (-2.0 * d * eps.xy() + f * eps.yz());
    if include_prestrain {
        let scale = match manifold {
            Manifold::Ground => 1.0,
            Manifold::Excited => {
                if params.d_g_phz != 0.0 {
                    params.d_u_phz / params.d_g_phz
                } else {
                    1.0
                }
            }
        };
        egx += scale * params.prestrain_egx_ghz;
        egy += scale * params.prestrain_egy_ghz;
    }
    Ok(StrainEnergies {
        a1_ghz: a1,
        egx_ghz: egx,
        egy_ghz: egy,
    })
}

/// 4×4 Hermitian manifold Hamiltonian in GHz, basis {e_x↑, e_x↓, e_y↑, e_y↓}.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldHamiltonian {
    pub matrix: CMat4,
    pub manifold: Manifold,
}

/// Hermiticity tolerance in GHz.
pub const HERMITICITY_TOL: f64 = 1e-12;

impl ManifoldHamiltonian {
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.matrix - self.matrix.adjoint();
        d.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }
}

fn orbital_kron(orb: Matrix2<C64>, spin: Matrix2<C64>) -> CMat4 {
    let mut out = CMat4::zeros();
    for oi in 0..2 {
        for oj in 0..2 {
            for si in 0..2 {
                for sj in 0..2 {
                    out[(2 * oi + si, 2 * oj + sj)] = orb[(oi, oj)] * spin[(si, sj)];
                }
            }
        }
    }
    out
}

fn sigma_x() -> Matrix2<C64> {
    Matrix2::new(0.0.into(), 1.0.into(), 1.0.into(), 0.0.into())
}
fn sigma_y() -> Matrix2<C64> {
    Matrix2::new(
        0.0.into(),
        C64::new(0.0, -1.0),
        C64::new(0.0, 1.0),
        0.0.into(),
    )
}
fn sigma_z() -> Matrix2<C64> {
    Matrix2::new(1.0.into(), 0.0.into(), 0.0.into(), C64::new(-1.0, 0.0))
}
fn ident2() -> Matrix2<C64> {
    Matrix2::identity()
}

/// H_strain for the given energies (no spin-orbit, no Zeeman).
pub fn strain_hamiltonian(e: &StrainEnergies) -> CMat4 {
    CMat4::identity() * C64::from(e.a1_ghz)
        + orbital_kron(sigma_z(), ident2()) * C64::from(e.egx_ghz)
        + orbital_kron(sigma_x(), ident2()) * C64::from(e.egy_ghz)
}

/// Build the full manifold Hamiltonian. `eps` must be in an SnV frame;
/// `b_field` is the magnetic field vector in the same frame (Tesla).
pub fn build_manifold_hamiltonian(
    params: &SnVParams,
    manifold: Manifold,
    eps: &StrainTensor,
    b_field: Vector3<f64>,
) -> Result<ManifoldHamiltonian, HamiltonianError> {
    let lambda = match manifold {
        Manifold::Ground => params.lambda_g_ghz,
        Manifold::Excited => params.lambda_u_ghz,
    };
    let energies = strain_energies(params, manifold, eps, true)?;

    // spin-orbit: -λ (L_z ⊗ S_z), L_z = σ_y over orbitals, S_z = σ_z/2
    let mut h = orbital_kron(sigma_y(), sigma_z()) * C64::from(-lambda / 2.0);

    h += strain_hamiltonian(&energies);

    // spin Zeeman: γ_s B·S with S = σ/2
    let gs = params.gamma_s_ghz_per_t;
    let bdots = sigma_x() * C64::from(b_field.x) + sigma_y() * C64::from(b_field.y)
        + sigma_z() * C64::from(b_field.z);
    h += orbital_kron(ident2(), bdots) * C64::from(gs / 2.0);

    // orbital Zeeman: q γ_L B_z' L_z with γ_L = γ_s/2
    let gl = params.quench_q * gs / 2.0;
    h += orbital_kron(sigma_y(), ident2()) * C64::from(gl * b_field.z);

    // exact Hermitian symmetrization (removes last-bit asymmetry)
    let h = (h + h.adjoint()) * C64::from(0.5);
    Ok(ManifoldHamiltonian {
        matrix: h,
        manifold,
    })
}

/// Full eigendecomposition of a manifold Hamiltonian.
///
/// Eigenvalues are ascending; each eigenvector's phase is fixed so the
/// largest-magnitude component is real positive, making matrix elements
/// reproducible across runs.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Eigenvalues in GHz, ascending.
    pub values: Vector4<f64>,
    /// Eigenvectors as columns, same order as `values`.
    pub vectors: CMat4,
}

impl EigenSystem {
    pub fn vector(&self, i: usize) -> nalgebra::Vector4<C64> {
        self.vectors.column(i).into_owned()
    }
}

pub fn diagonalize(h: &ManifoldHamiltonian) -> Result<EigenSystem, HamiltonianError> {
    let defect = h.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(HamiltonianError::NumericalHermiticity {
            defect,
            tol: HERMITICITY_TOL,
        });
    }
    let sym = (h.matrix + h.matrix.adjoint()) * C64::from(0.5);
    let eig = nalgebra::SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());

    let mut values = Vector4::zeros();
    let mut vectors = CMat4::zeros();
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = eig.eigenvalues[src];
        let mut col = eig.eigenvectors.column(src).into_owned();
        // deterministic phase: largest-magnitude component real positive
        let mut best = 0;
        for i in 1..4 {
            if col[i].norm() > col[best].norm() {
                best = i;
            }
        }
        let phase = col[best] / C64::from(col[best].norm().max(f64::MIN_POSITIVE));
        col *= phase.conj();
        vectors.set_column(dst, &col);
    }
    Ok(EigenSystem { values, vectors })
}

/// One optical line of the transition table.
#[derive(Debug, Clone, Serialize)]
pub struct TransitionLine {
    pub label: String,
    pub frequency_offset_ghz: f64,
    pub relative_strength: f64,
}

/// Optical transitions between ground and excited manifolds.
///
/// Offsets are Ee − Eg in GHz around the (unmodeled) electronic gap. At zero
/// field the four spin-degenerate lines are labeled `a`..`d` from high to low
/// frequency; under a field each group splits into four lines labeled
/// `<group><A|B><1|2>` where `A` marks the two strongest (spin-conserving)
/// lines and `B` the two weakest (spin-flipping), `1` the higher-frequency
/// member of each pair.
#[derive(Debug, Clone, Serialize)]
pub struct TransitionTable {
    pub lines: Vec<TransitionLine>,
}

impl TransitionTable {
    /// Lines of one zero-field group, e.g. all lines whose label starts 'c'.
    pub fn group(&self, letter: char) -> Vec<&TransitionLine> {
        self.lines
            .iter()
            .filter(|l| l.label.starts_with(letter))
            .collect()
    }

    pub fn line(&self, label: &str) -> Option<&TransitionLine> {
        self.lines.iter().find(|l| l.label == label)
    }
}

/// Fixed orbital dipole representation: equal-weight incoherent sum over
/// {I, σ_z, σ_x} ⊗ I_spin. Used only for relative line strengths.
fn line_strength(
    ge: &EigenSystem,
    ee: &EigenSystem,
    gi: usize,
    ej: usize,
) -> f64 {
    let g = ge.vector(gi);
    let e = ee.vector(ej);
    let ops = [
        orbital_kron(ident2(), ident2()),
        orbital_kron(sigma_z(), ident2()),
        orbital_kron(sigma_x(), ident2()),
    ];
    ops.iter()
        .map(|op| {
            let amp: C64 = (e.adjoint() * (op * g))[(0, 0)];
            amp.norm_sqr()
        })
        .sum()
}

pub fn optical_transitions(
    params: &SnVParams,
    eps: &StrainTensor,
    b_field: Vector3<f64>,
) -> Result<TransitionTable, HamiltonianError> {
    let hg = build_manifold_hamiltonian(params, Manifold::Ground, eps, b_field)?;
    let he = build_manifold_hamiltonian(params, Manifold::Excited, eps, b_field)?;
    let eg = diagonalize(&hg)?;
    let ee = diagonalize(&he)?;

    // group letter by branch: ground 0,1 = lower doublet, 2,3 = upper; same
    // for excited. (lower g, upper e) = a … (upper g, lower e) = d.
    let letter = |gi: usize, ej: usize| match (gi < 2, ej < 2) {
        (true, false) => 'a',
        (false, false) => 'b',
        (true, true) => 'c',
        (false, true) => 'd',
    };

    struct Raw {
        letter: char,
        offset: f64,
        strength: f64,
    }
    let mut raw = Vec::with_capacity(16);
    for gi in 0..4 {
        for ej in 0..4 {
            raw.push(Raw {
                letter: letter(gi, ej),
                offset: ee.values[ej] - eg.values[gi],
                strength: line_strength(&eg, &ee, gi, ej),
            });
        }
    }

    let mut lines = Vec::new();
    for letter in ['a', 'b', 'c', 'd'] {
        let mut group: Vec<&Raw> = raw.iter().filter(|r| r.letter == letter).collect();
        // spin-degenerate group: merge lines closer than 1e-6 GHz
        group.sort_by(|x, y| x.offset.partial_cmp(&y.offset).unwrap());
        let mut clusters: Vec<(f64, f64)> = Vec::new(); // (offset, strength)
        for r in group {
            match clusters.last_mut() {
                Some((off, s)) if (r.offset - *off).abs() < 1e-6 => *s += r.strength,
                _ => clusters.push((r.offset, r.strength)),
            }
        }
        if clusters.len() == 1 {
            lines.push(TransitionLine {
                label: letter.to_string(),
                frequency_offset_ghz: clusters[0].0,
                relative_strength: clusters[0].1,
            });
        } else {
            // field-split group: rank by strength to tell A (strong,
            // spin-conserving) from B (weak, spin-flipping) pairs
            let mut by_strength: Vec<usize> = (0..clusters.len()).collect();
            by_strength.sort_by(|&x, &y| clusters[y].1.partial_cmp(&clusters[x].1).unwrap());
            let strong: Vec<usize> = by_strength.iter().take(clusters.len() / 2).copied().collect();
            let mut named: Vec<(String, f64, f64)> = Vec::new();
            for (pair_char, members) in [('A', &strong), ('B', &by_strength[clusters.len() / 2..].to_vec())] {
                let mut ms = members.clone();
                ms.sort_by(|&x, &y| clusters[y].0.partial_cmp(&clusters[x].0).unwrap());
                for (rank, &ci) in ms.iter().enumerate() {
                    named.push((
                        format!("{letter}{pair_char}{}", rank + 1),
                        clusters[ci].0,
                        clusters[ci].1,
                    ));
                }
            }
            named.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap());
            for (label, offset, strength) in named {
                lines.push(TransitionLine {
                    label,
                    frequency_offset_ghz: offset,
                    relative_strength: strength,
                });
            }
        }
    }

    let max = lines
        .iter()
        .map(|l| l.relative_strength)
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    for l in &mut lines {
        l.relative_strength /= max;
    }
    // final ordering: a group first (descending frequency)
    lines.sort_by(|x, y| y.frequency_offset_ghz.partial_cmp(&x.frequency_offset_ghz).unwrap());
    Ok(TransitionTable { lines })
}

/// DC shift of transition `c`, both through the rigid-A1 approximation and
/// through the full transition tables. `exact_ghz` is the contract value.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DcShift {
    pub approx_ghz: f64,
    pub exact_ghz: f64,
}

pub fn delta_dc(params: &SnVParams, eps: &StrainTensor) -> Result<DcShift, HamiltonianError> {
    let approx = PHZ_TO_GHZ * params.t_par_difference_phz() * eps.zz();

    let b0 = Vector3::zeros();
    let strained = optical_transitions(params, eps, b0)?;
    let reference = optical_transitions(params, &StrainTensor::zero(eps.frame()), b0)?;
    let exact = c_line_offset(&strained) - c_line_offset(&reference);
    Ok(DcShift {
        approx_ghz: approx,
        exact_ghz: exact,
    })
}

/// Frequency of the `c` line (lower ground doublet → lower excited doublet).
/// At zero field the group is a single line; under a field use its centroid.
fn c_line_offset(table: &TransitionTable) -> f64 {
    let group = table.group('c');
    let total: f64 = group.iter().map(|l| l.relative_strength).sum();
    group
        .iter()
        .map(|l| l.frequency_offset_ghz * l.relative_strength)
        .sum::<f64>()
        / total
}

/// Orbital-phonon coupling rate from zero-point strain, in Hz.
///
/// Evaluated with the ground-manifold E_g susceptibilities and without
/// pre-strain. Zero-point strain components are expected below 1e-9.
pub fn g_orb(params: &SnVParams, eps_zpf: &StrainTensor) -> Result<f64, HamiltonianError> {
    debug_assert!(eps_zpf.max_abs() < 1e-9, "zero-point strain should be tiny");
    let e = strain_energies(params, Manifold::Ground, eps_zpf, false)?;
    Ok(e.eg_magnitude_ghz() * GHZ_TO_HZ)
}

/// Spin-phonon coupling rate in Hz: the zero-point strain matrix element
/// between the two lowest ground eigenstates under pre-strain and field.
///
/// At B = 0 the pair is a Kramers doublet and the coupling is undefined.
/// If a field is present but the pair is still degenerate below 1e-6 GHz
/// (exactly zero pre-strain), the basis-invariant half-spread of the
/// projected coupling operator is returned — the continuous limit of the
/// matrix element.
pub fn g_sm(
    params: &SnVParams,
    eps_zpf: &StrainTensor,
    b_field: Vector3<f64>,
) -> Result<f64, HamiltonianError> {
    if b_field.norm() == 0.0 {
        return Err(HamiltonianError::DegenerateQubit);
    }
    let zero = StrainTensor::zero(eps_zpf.frame());
    let h = build_manifold_hamiltonian(params, Manifold::Ground, &zero, b_field)?;
    let eig = diagonalize(&h)?;

    let e_zpf = strain_energies(params, Manifold::Ground, eps_zpf, false)?;
    let v = strain_hamiltonian(&e_zpf);

    let splitting = eig.values[1] - eig.values[0];
    let v1 = eig.vector(0);
    let v2 = eig.vector(1);
    let coupling_ghz = if splitting < 1e-6 {
        // degenerate qubit: half-spread of the projected operator
        let m11: C64 = (v1.adjoint() * (v * v1))[(0, 0)];
        let m22: C64 = (v2.adjoint() * (v * v2))[(0, 0)];
        let m12: C64 = (v1.adjoint() * (v * v2))[(0, 0)];
        let half_diff = (m11.re - m22.re) / 2.0;
        (half_diff.powi(2) + m12.norm_sqr()).sqrt()
    } else {
        let m12: C64 = (v1.adjoint() * (v * v2))[(0, 0)];
        m12.norm()
    };
    Ok(coupling_ghz * GHZ_TO_HZ)
}

/// Ground-state qubit splitting E₂ − E₁ in GHz under pre-strain and field.
pub fn spin_transition_frequency(
    params: &SnVParams,
    b_field: Vector3<f64>,
) -> Result<f64, HamiltonianError> {
    let zero = StrainTensor::zero(crate::frames::Frame::SnvAxial);
    let h = build_manifold_hamiltonian(params, Manifold::Ground, &zero, b_field)?;
    let eig = diagonalize(&h)?;
    Ok(eig.values[1] - eig.values[0])
}

/// Pointwise g_sm over a transverse-field range (Tesla, ascending).
pub fn g_sm_field_sweep(
    params: &SnVParams,
    eps_zpf: &StrainTensor,
    b_range: &[f64],
) -> Result<Vec<(f64, f64)>, HamiltonianError> {
    debug_assert!(b_range.windows(2).all(|w| w[0] < w[1]), "range must ascend");
    debug_assert!(b_range.iter().all(|&b| b > 0.0), "fields must be positive");
    b_range
        .iter()
        .map(|&b| Ok((b, g_sm(params, eps_zpf, Vector3::new(b, 0.0, 0.0))?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::Frame;
    use crate::rng::Stream;

    fn zero_strain() -> StrainTensor {
        StrainTensor::zero(Frame::SnvAxial)
    }

    fn snv_voigt(v: [f64; 6]) -> StrainTensor {
        StrainTensor::from_voigt(v, Frame::SnvAxial)
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn spin_orbit_doublets() {
        let p = SnVParams::default();
        let h =
            build_manifold_hamiltonian(&p, Manifold::Ground, &zero_strain(), Vector3::zeros())
                .unwrap();
        let eig = diagonalize(&h).unwrap();
        assert_close(eig.values[0], -425.0, 1e-9);
        assert_close(eig.values[1], -425.0, 1e-9);
        assert_close(eig.values[2], 425.0, 1e-9);
        assert_close(eig.values[3], 425.0, 1e-9);
    }

    #[test]
    fn prestrain_splitting_matches_two_level_oracle() {
        // analytic oracle: eigenvalues ±√(α² + λ²/4) for each spin
        let alpha = 300.0;
        let p = SnVParams {
            prestrain_egx_ghz: alpha,
            ..SnVParams::default()
        };
        let h =
            build_manifold_hamiltonian(&p, Manifold::Ground, &zero_strain(), Vector3::zeros())
                .unwrap();
        let eig = diagonalize(&h).unwrap();
        let expect = (p.lambda_g_ghz.powi(2) + 4.0 * alpha * alpha).sqrt();
        assert_close(eig.values[2] - eig.values[1], expect, 1e-9);
    }

    #[test]
    fn axial_field_zeeman_splitting() {
        let p = SnVParams {
            quench_q: 0.0,
            ..SnVParams::default()
        };
        let h = build_manifold_hamiltonian(
            &p,
            Manifold::Ground,
            &zero_strain(),
            Vector3::new(0.0, 0.0, 0.1),
        )
        .unwrap();
        let eig = diagonalize(&h).unwrap();
        // each branch splits by γ_s·B = 2.8 GHz
        assert_close(eig.values[1] - eig.values[0], 2.8, 1e-9);
        assert_close(eig.values[3] - eig.values[2], 2.8, 1e-9);
    }

    #[test]
    fn diagonal_matrix_eigensystem() {
        let m = CMat4::from_diagonal(&Vector4::new(
            C64::from(1.0),
            C64::from(2.0),
            C64::from(3.0),
            C64::from(4.0),
        ));
        let eig = diagonalize(&ManifoldHamiltonian {
            matrix: m,
            manifold: Manifold::Ground,
        })
        .unwrap();
        for i in 0..4 {
            assert_close(eig.values[i], (i + 1) as f64, 1e-12);
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_close(eig.vectors[(j, i)].re, expect, 1e-12);
                assert_close(eig.vectors[(j, i)].im, 0.0, 1e-12);
            }
        }
    }

    fn random_hermitian(s: &mut Stream, scale: f64) -> CMat4 {
        let mut m = CMat4::zeros();
        for i in 0..4 {
            m[(i, i)] = C64::from(s.uniform(-scale, scale));
            for j in (i + 1)..4 {
                let v = C64::new(s.uniform(-scale, scale), s.uniform(-scale, scale));
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        m
    }

    #[test]
    fn reconstruction_oracle_random_hermitian() {
        let mut s = Stream::new(5, 0);
        for _ in 0..300 {
            let m = random_hermitian(&mut s, 1000.0);
            let eig = diagonalize(&ManifoldHamiltonian {
                matrix: m,
                manifold: Manifold::Ground,
            })
            .unwrap();
            let lam = CMat4::from_diagonal(&Vector4::new(
                C64::from(eig.values[0]),
                C64::from(eig.values[1]),
                C64::from(eig.values[2]),
                C64::from(eig.values[3]),
            ));
            let rebuilt = eig.vectors * lam * eig.vectors.adjoint();
            let err = (rebuilt - m).iter().fold(0.0f64, |a, v| a.max(v.norm()));
            assert!(err < 1e-9, "reconstruction error {err}");
            // orthonormality
            let gram = eig.vectors.adjoint() * eig.vectors;
            let gerr = (gram - CMat4::identity())
                .iter()
                .fold(0.0f64, |a, v| a.max(v.norm()));
            assert!(gerr < 1e-10);
            // trace consistency
            let tr: f64 = (0..4).map(|i| m[(i, i)].re).sum();
            let sum: f64 = eig.values.iter().sum();
            assert!((tr - sum).abs() < 1e-9 * tr.abs().max(1.0));
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = CMat4::zeros();
        m[(0, 1)] = C64::from(1.0);
        let r = diagonalize(&ManifoldHamiltonian {
            matrix: m,
            manifold: Manifold::Ground,
        });
        assert!(matches!(
            r,
            Err(HamiltonianError::NumericalHermiticity { .. })
        ));
    }

    #[test]
    fn zero_field_transitions_have_so_splittings() {
        let p = SnVParams::default();
        let t = optical_transitions(&p, &zero_strain(), Vector3::zeros()).unwrap();
        assert_eq!(t.lines.len(), 4);
        let f: Vec<f64> = t.lines.iter().map(|l| l.frequency_offset_ghz).collect();
        // a - b = λ_g, c - d = λ_g, b - c = λ_u - λ_g
        assert_close(f[0] - f[1], p.lambda_g_ghz, 1e-9);
        assert_close(f[2] - f[3], p.lambda_g_ghz, 1e-9);
        assert_close(f[1] - f[2], p.lambda_u_ghz - p.lambda_g_ghz, 1e-9);
        assert_eq!(t.lines[0].label, "a");
        assert_eq!(t.lines[3].label, "d");
        assert!(t.lines.iter().all(|l| l.relative_strength > 0.0));
    }

    #[test]
    fn transverse_field_splits_c_group_with_spin_flip_lines() {
        let p = SnVParams {
            prestrain_egx_ghz: 865.0,
            ..SnVParams::default()
        };
        let t = optical_transitions(&p, &zero_strain(), Vector3::new(0.022, 0.0, 0.0)).unwrap();
        let c = t.group('c');
        assert_eq!(c.len(), 4, "c group must split into four lines");
        // all four visible, two weak (spin-flipping) labeled B
        let b1 = t.line("cB1").expect("spin-flipping line cB1 present");
        assert!(b1.relative_strength > 1e-6);
        let a1 = t.line("cA1").unwrap();
        assert!(a1.relative_strength > b1.relative_strength);
        // four distinct frequencies
        for w in c.windows(2) {
            assert!(
                (w[0].frequency_offset_ghz - w[1].frequency_offset_ghz).abs() > 1e-4,
                "lines must be distinct"
            );
        }
    }

    #[test]
    fn axial_field_produces_partially_degenerate_groups() {
        // equal gyromagnetic ratios in both manifolds make the outer
        // spin-conserving lines coincide: three distinct frequencies per
        // group instead of four
        let p = SnVParams {
            quench_q: 0.0,
            ..SnVParams::default()
        };
        let t = optical_transitions(&p, &zero_strain(), Vector3::new(0.0, 0.0, 0.05)).unwrap();
        let c = t.group('c');
        assert_eq!(c.len(), 3);
        assert!(t.lines.iter().all(|l| l.relative_strength > 0.0));
        assert!(t.lines.iter().all(|l| l.frequency_offset_ghz.is_finite()));
    }

    #[test]
    fn pure_axial_strain_shifts_all_lines_rigidly() {
        let p = SnVParams::default();
        let eps = snv_voigt([0.0, 0.0, 4e-5, 0.0, 0.0, 0.0]);
        let t0 = optical_transitions(&p, &zero_strain(), Vector3::zeros()).unwrap();
        let t1 = optical_transitions(&p, &eps, Vector3::zeros()).unwrap();
        let shift = PHZ_TO_GHZ * p.t_par_difference_phz() * 4e-5;
        for (l0, l1) in t0.lines.iter().zip(&t1.lines) {
            assert_close(
                l1.frequency_offset_ghz - l0.frequency_offset_ghz,
                shift,
                1e-9,
            );
        }
    }

    #[test]
    fn delta_dc_paper_anchor() {
        let p = SnVParams::default();
        assert_close(p.t_par_difference_phz(), -0.46, 1e-12);
        let eps = snv_voigt([0.0, 0.0, 4.35e-5, 0.0, 0.0, 0.0]);
        let s = delta_dc(&p, &eps).unwrap();
        assert_close(s.approx_ghz, -20.01, 0.005);
        // pure axial: exact equals approximate
        assert_close(s.exact_ghz, s.approx_ghz, 1e-6);

        let z = delta_dc(&p, &zero_strain()).unwrap();
        assert_eq!(z.approx_ghz, 0.0);
        assert_close(z.exact_ghz, 0.0, 1e-12);
    }

    #[test]
    fn delta_dc_approx_matches_exact_for_small_eg() {
        let p = SnVParams::default();
        let eps = snv_voigt([5e-8, -4e-8, 3e-5, 2e-8, 4e-8, 1e-8]);
        let s = delta_dc(&p, &eps).unwrap();
        assert!(
            ((s.exact_ghz - s.approx_ghz) / s.exact_ghz).abs() < 0.01,
            "approx {} vs exact {}",
            s.approx_ghz,
            s.exact_ghz
        );
    }

    #[test]
    fn delta_dc_exact_is_odd_in_axial_strain() {
        let p = SnVParams::default();
        for &e in &[1e-5, 4e-5, 7e-5] {
            let plus = delta_dc(&p, &snv_voigt([0.0, 0.0, e, 0.0, 0.0, 0.0])).unwrap();
            let minus = delta_dc(&p, &snv_voigt([0.0, 0.0, -e, 0.0, 0.0, 0.0])).unwrap();
            assert!((plus.exact_ghz + minus.exact_ghz).abs() < 1e-9);
        }
    }

    #[test]
    fn g_orb_examples() {
        let p = SnVParams::default();
        assert_eq!(g_orb(&p, &zero_strain()).unwrap(), 0.0);
        // d·(ε_xx − ε_yy) = 1 PHz · 2e-12 = 2 kHz
        let eps = snv_voigt([1e-12, -1e-12, 0.0, 0.0, 0.0, 0.0]);
        assert_close(g_orb(&p, &eps).unwrap(), 2e3, 1e-6);
    }

    #[test]
    fn g_sm_errors_at_zero_field() {
        let p = SnVParams {
            prestrain_egx_ghz: 865.0,
            ..SnVParams::default()
        };
        let eps = snv_voigt([0.0, 0.0, 0.0, 9.5e-10, 0.0, -9.5e-10]);
        let r = g_sm(&p, &eps, Vector3::zeros());
        assert_eq!(r, Err(HamiltonianError::DegenerateQubit));
    }

    #[test]
    fn g_sm_paper_anchor_at_22_mt() {
        // pre-strain 865 GHz, transverse 0.022 T, zpf calibrated to the
        // fixture used by the shipped device config
        let p = SnVParams {
            prestrain_egx_ghz: 865.0,
            ..SnVParams::default()
        };
        let eps = snv_voigt([0.0, 0.0, 0.0, 9.5e-10, 0.0, -9.5e-10]);
        let gorb = g_orb(&p, &eps).unwrap();
        assert_close(gorb, 2.85e6, 1.0);
        let g = g_sm(&p, &eps, Vector3::new(0.022, 0.0, 0.0)).unwrap();
        assert!(g > 256.0 && g < 768.0, "g_sm = {g} Hz");
    }

    #[test]
    fn g_sm_zero_prestrain_monotone_toward_g_orb() {
        let p = SnVParams::default();
        let eps = snv_voigt([0.0, 0.0, 0.0, 9.5e-10, 0.0, -9.5e-10]);
        let gorb = g_orb(&p, &eps).unwrap();
        let range: Vec<f64> = (1..=40).map(|i| 0.05 * i as f64).collect();
        let sweep = g_sm_field_sweep(&p, &eps, &range).unwrap();
        for w in sweep.windows(2) {
            assert!(w[1].1 >= w[0].1, "sweep must be nondecreasing");
        }
        for (_, g) in &sweep {
            assert!(*g <= gorb * (1.0 + 1e-6));
        }
        // asymptote: by 1000 T the coupling approaches g_orb
        let far = g_sm(&p, &eps, Vector3::new(1000.0, 0.0, 0.0)).unwrap();
        assert!(far > 0.95 * gorb, "far-field {far} vs g_orb {gorb}");
    }

    #[test]
    fn g_sm_bounded_by_g_orb_with_prestrain() {
        let p = SnVParams {
            prestrain_egx_ghz: 865.0,
            ..SnVParams::default()
        };
        let eps = snv_voigt([0.0, 0.0, 0.0, 9.5e-10, 0.0, -9.5e-10]);
        let gorb = g_orb(&p, &eps).unwrap();
        for &b in &[0.01, 0.1, 0.5, 1.0, 2.0] {
            let g = g_sm(&p, &eps, Vector3::new(b, 0.0, 0.0)).unwrap();
            assert!(g <= gorb * (1.0 + 1e-6));
        }
    }

    #[test]
    fn single_point_sweep_equals_pointwise() {
        let p = SnVParams {
            prestrain_egx_ghz: 865.0,
            ..SnVParams::default()
        };
        let eps = snv_voigt([0.0, 0.0, 0.0, 9.5e-10, 0.0, -9.5e-10]);
        let sweep = g_sm_field_sweep(&p, &eps, &[0.022]).unwrap();
        let point = g_sm(&p, &eps, Vector3::new(0.022, 0.0, 0.0)).unwrap();
        assert_eq!(sweep.len(), 1);
        assert_eq!(sweep[0].1, point);
    }

    #[test]
    fn spin_transition_examples() {
        let p = SnVParams {
            quench_q: 0.0,
            ..SnVParams::default()
        };
        let f = spin_transition_frequency(&p, Vector3::new(0.0, 0.0, 0.02)).unwrap();
        assert_close(f, 0.56, 1e-9);

        let p2 = SnVParams {
            prestrain_egx_ghz: 865.0,
            ..SnVParams::default()
        };
        let f2 = spin_transition_frequency(&p2, Vector3::new(0.022, 0.0, 0.0)).unwrap();
        assert!(f2 > 0.45 && f2 < 0.65, "splitting {f2} GHz");

        let f0 = spin_transition_frequency(&p2, Vector3::zeros()).unwrap();
        assert!(f0.abs() < 1e-9);
    }

    #[test]
    fn transverse_direction_in_plane_is_gauge() {
        // spin Zeeman direction within the transverse plane cannot matter
        let p = SnVParams {
            prestrain_egx_ghz: 865.0,
            ..SnVParams::default()
        };
        let eps = snv_voigt([0.0, 0.0, 0.0, 9.5e-10, 0.0, -9.5e-10]);
        let gx = g_sm(&p, &eps, Vector3::new(0.022, 0.0, 0.0)).unwrap();
        let gy = g_sm(&p, &eps, Vector3::new(0.0, 0.022, 0.0)).unwrap();
        assert_close(gx, gy, 1e-6 * gx.abs());
    }

    #[test]
    fn hermiticity_and_kramers_over_random_draws() {
        let mut s = Stream::new(77, 0);
        for _ in 0..1000 {
            let p = SnVParams {
                lambda_g_ghz: s.uniform(500.0, 1200.0),
                lambda_u_ghz: s.uniform(2000.0, 4000.0),
                t_par_g_phz: s.uniform(-1.0, 1.0),
                t_par_u_phz: s.uniform(-1.0, 1.0),
                t_perp_g_phz: s.uniform(-0.3, 0.3),
                t_perp_u_phz: s.uniform(-0.3, 0.3),
                d_g_phz: s.uniform(0.5, 2.0),
                f_g_phz: s.uniform(0.5, 2.0),
                d_u_phz: s.uniform(0.5, 2.0),
                f_u_phz: s.uniform(0.5, 2.0),
                gamma_s_ghz_per_t: s.uniform(20.0, 30.0),
                quench_q: s.uniform(0.0, 1.0),
                prestrain_egx_ghz: s.uniform(-1000.0, 1000.0),
                prestrain_egy_ghz: s.uniform(-1000.0, 1000.0),
            };
            let eps = snv_voigt([
                s.uniform(-1e-4, 1e-4),
                s.uniform(-1e-4, 1e-4),
                s.uniform(-1e-4, 1e-4),
                s.uniform(-1e-4, 1e-4),
                s.uniform(-1e-4, 1e-4),
                s.uniform(-1e-4, 1e-4),
            ]);
            let h = build_manifold_hamiltonian(&p, Manifold::Ground, &eps, Vector3::zeros())
                .unwrap();
            assert!(h.hermiticity_defect() < HERMITICITY_TOL);
            let eig = diagonalize(&h).unwrap();
            // Kramers pairs at B = 0 for any strain
            assert!((eig.values[1] - eig.values[0]).abs() < 1e-9);
            assert!((eig.values[3] - eig.values[2]).abs() < 1e-9);
        }
    }
}
