//! The matrix oracle: concrete finite-dimensional partial isometries,
//! identity checks, Wold splits, numerical indices, π products, the subspace
//! lattice, and the Cayley-transform operations.
//!
//! Subspaces are orthonormal column bases; every rank decision goes through
//! an SVD with threshold `tol × σ_max`. "Infinite" symbolic data is modelled
//! by truncation plus metadata kept by the caller.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::index::{ExtNat, StarIndex};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = nalgebra::DVector<Complex64>;

/// Default tolerance for identity checks.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default tolerance for roundtrips (Cayley).
pub const ROUNDTRIP_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum NumericError {
    #[error("matrix must be square")]
    NotSquare,
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("shift step must satisfy 1 <= k < n")]
    BadShift,
    #[error("not a partial isometry (residual {0:.3e})")]
    NotPartialIsometry(f64),
    #[error("not a projection (residual {0:.3e})")]
    NotProjection(f64),
    #[error("not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),
    #[error("not unitary (residual {0:.3e})")]
    NotUnitary(f64),
    #[error("1 lies in the spectrum; no bounded Cayley inverse")]
    UnitInSpectrum,
    #[error("defect vectors must have unit norm")]
    NotUnitVector,
    #[error("defect identity W^2 = alpha W failed (residual {0:.3e})")]
    DefectIdentity(f64),
    #[error("defect vectors do not span ker V and ker V*")]
    DefectMismatch,
    #[error("range iteration failed to stabilize")]
    NonStabilizing,
    #[error("Wold split validation failed (residual {0:.3e})")]
    WoldValidation(f64),
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Largest singular value; 0 for empty matrices.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Numerical rank with threshold `tol × max(σ_max, 1)`. The floor keeps
/// numerically-zero matrices at rank 0; all operators here have norm ≤ 1.
pub fn rank(m: &CMatrix, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let thresh = tol * sv.max().max(1.0);
    sv.iter().filter(|&&s| s > thresh).count()
}

/// Orthonormal basis of the range, as columns.
pub fn range_basis(m: &CMatrix, tol: f64) -> CMatrix {
    if m.nrows() == 0 || m.ncols() == 0 {
        return CMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.as_ref().expect("u requested");
    let sv = &svd.singular_values;
    let thresh = tol * sv.max().max(1.0);
    let r = sv.iter().filter(|&&s| s > thresh).count();
    u.columns(0, r).into_owned()
}

/// Orthonormal basis of the null space, as columns.
pub fn null_basis(m: &CMatrix, tol: f64) -> CMatrix {
    let n = m.ncols();
    if m.nrows() == 0 || n == 0 {
        return CMatrix::identity(n, n);
    }
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let sv = &svd.singular_values;
    let thresh = tol * sv.max().max(1.0);
    let r = sv.iter().filter(|&&s| s > thresh).count();
    // Rows r.. of V^H span the kernel; V may be truncated to min(n, rows).
    let mut cols: Vec<CVector> = Vec::new();
    for i in r..vt.nrows() {
        cols.push(vt.row(i).adjoint());
    }
    if cols.is_empty() {
        return CMatrix::zeros(n, 0);
    }
    CMatrix::from_columns(&cols)
}

/// Orthogonal projection onto the span of an orthonormal basis.
pub fn projector(basis: &CMatrix) -> CMatrix {
    if basis.ncols() == 0 {
        return CMatrix::zeros(basis.nrows(), basis.nrows());
    }
    basis * basis.adjoint()
}

// ---------------------------------------------------------------------------
// Structured constructors
// ---------------------------------------------------------------------------

/// The truncated k-step shift on ℂⁿ: e_i ↦ e_{i+k} for i < n − k, else 0.
pub fn make_truncated_shift(k: usize, n: usize) -> Result<CMatrix, NumericError> {
    if k == 0 || k >= n {
        return Err(NumericError::BadShift);
    }
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n - k {
        m[(i + k, i)] = one();
    }
    Ok(m)
}

/// diag(e^{iθ₁}, …, e^{iθₙ}).
pub fn diag_unitary(phases: &[f64]) -> CMatrix {
    let n = phases.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, &t) in phases.iter().enumerate() {
        m[(i, i)] = Complex64::from_polar(1.0, t);
    }
    m
}

/// The block shift [[0, 0], [1, 0]] on ℂ^{2·half}: the truncation-faithful
/// model of an infinite-defect shift (ε⁻ maps to ∞).
pub fn block_infinite_shift(half: usize) -> CMatrix {
    let n = 2 * half;
    let mut m = CMatrix::zeros(n, n);
    for i in 0..half {
        m[(half + i, i)] = one();
    }
    m
}

/// Block-diagonal direct sum.
pub fn direct_sum(blocks: &[CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = CMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        let k = b.nrows();
        m.view_mut((at, at), (k, k)).copy_from(b);
        at += k;
    }
    m
}

// ---------------------------------------------------------------------------
// Identity checks and π
// ---------------------------------------------------------------------------

/// a = aa*a within `tol`, with a*a additionally checked self-adjoint and
/// idempotent.
pub fn is_partial_isometry(a: &CMatrix, tol: f64) -> Result<bool, NumericError> {
    if a.nrows() != a.ncols() {
        return Err(NumericError::NotSquare);
    }
    let p = a.adjoint() * a;
    let triple = operator_norm(&(a * &p - a));
    let idem = operator_norm(&(&p * &p - &p));
    let sa = operator_norm(&(p.adjoint() - &p));
    Ok(triple <= tol && idem <= tol && sa <= tol)
}

fn check_projection(p: &CMatrix, tol: f64) -> Result<(), NumericError> {
    if p.nrows() != p.ncols() {
        return Err(NumericError::NotSquare);
    }
    let idem = operator_norm(&(p * p - p));
    let sa = operator_norm(&(p.adjoint() - p));
    let r = idem.max(sa);
    if r > tol {
        return Err(NumericError::NotProjection(r));
    }
    Ok(())
}

/// p ≤ q as projections: pH ⊆ qH, tested as ‖qp − p‖ ≤ tol.
pub fn projection_leq(p: &CMatrix, q: &CMatrix, tol: f64) -> Result<bool, NumericError> {
    check_projection(p, tol)?;
    check_projection(q, tol)?;
    if p.nrows() != q.nrows() {
        return Err(NumericError::DimensionMismatch);
    }
    Ok(operator_norm(&(q * p - p)) <= tol)
}

/// Which case of the π table applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum PiCase {
    /// x*x = yy*.
    Equal,
    /// x*x ≤ yy*; π(x,y) = x*x.
    InitialProjection,
    /// x*x ≥ yy*; π(x,y) = yy*.
    FinalProjection,
    /// Neither comparable but the product is nonzero.
    ProperProduct,
    Zero,
}

#[derive(Debug, Clone)]
pub struct PiNumeric {
    pub nonzero: bool,
    pub product: CMatrix,
    pub case: PiCase,
}

/// π(x, y) = (x*x)(yy*), with the four-case classification.
pub fn pi_numeric(x: &CMatrix, y: &CMatrix, tol: f64) -> Result<PiNumeric, NumericError> {
    if x.nrows() != x.ncols() || y.nrows() != y.ncols() {
        return Err(NumericError::NotSquare);
    }
    if x.nrows() != y.nrows() {
        return Err(NumericError::DimensionMismatch);
    }
    let p = x.adjoint() * x;
    let q = y * y.adjoint();
    let product = &p * &q;
    let nonzero = operator_norm(&product) > tol;
    let p_le_q = operator_norm(&(&q * &p - &p)) <= tol;
    let q_le_p = operator_norm(&(&p * &q - &q)) <= tol;
    let case = match (p_le_q, q_le_p, nonzero) {
        (true, true, _) => PiCase::Equal,
        (true, false, _) => PiCase::InitialProjection,
        (false, true, _) => PiCase::FinalProjection,
        (false, false, true) => PiCase::ProperProduct,
        (false, false, false) => PiCase::Zero,
    };
    Ok(PiNumeric { nonzero, product, case })
}

// ---------------------------------------------------------------------------
// Wold split and the numerical index
// ---------------------------------------------------------------------------

/// The Wold decomposition a = u + s of a concrete partial isometry, with the
/// subspace bases that witness it.
#[derive(Debug, Clone)]
pub struct WoldSplit {
    pub unitary_part: CMatrix,
    pub shift_part: CMatrix,
    pub h_u: CMatrix,
    pub h_s: CMatrix,
    pub ker_a: CMatrix,
    pub ker_a_star: CMatrix,
    pub ker_s_star: CMatrix,
}

fn stabilized_range(a: &CMatrix, tol: f64) -> Result<CMatrix, NumericError> {
    let n = a.nrows();
    let mut power = a.clone();
    let mut basis = range_basis(&power, tol);
    for _ in 0..=n {
        let next_power = a * &power;
        let next = range_basis(&next_power, tol);
        if next.ncols() == basis.ncols() {
            return Ok(basis);
        }
        power = next_power;
        basis = next;
    }
    Err(NumericError::NonStabilizing)
}

/// Intersection of two subspaces given by orthonormal bases, via principal
/// angles.
pub fn subspace_intersection(bx: &CMatrix, by: &CMatrix, tol: f64) -> CMatrix {
    if bx.ncols() == 0 || by.ncols() == 0 {
        return CMatrix::zeros(bx.nrows(), 0);
    }
    let m = bx.adjoint() * by;
    let svd = m.clone().svd(true, false);
    let u = svd.u.as_ref().expect("u requested");
    let close = svd.singular_values.iter().filter(|&&s| s > 1.0 - 100.0 * tol).count();
    if close == 0 {
        return CMatrix::zeros(bx.nrows(), 0);
    }
    let dirs = bx * u.columns(0, close).into_owned();
    range_basis(&dirs, tol)
}

/// Splits `a` into its unitary and shift parts. The unitary space is the
/// simultaneous stabilization of the forward and backward power ranges,
/// H_u = ∩ₘ range(aᵐ) ∩ ∩ₘ range(a*ᵐ); it degrades to {0} for truncated
/// pure shifts.
pub fn wold_split(a: &CMatrix, tol: f64) -> Result<WoldSplit, NumericError> {
    if !is_partial_isometry(a, tol)? {
        let residual = operator_norm(&(a * (a.adjoint() * a) - a));
        return Err(NumericError::NotPartialIsometry(residual));
    }
    let forward = stabilized_range(a, tol)?;
    let backward = stabilized_range(&a.adjoint(), tol)?;
    let h_u = subspace_intersection(&forward, &backward, tol);
    let p_u = projector(&h_u);
    let u = &p_u * a * &p_u;
    let s = a - &u;

    // H_s = initial space ⊖ H_u.
    let init = range_basis(&a.adjoint(), tol);
    let p_s = projector(&init) - &p_u;
    let h_s = range_basis(&p_s, tol);

    let split = WoldSplit {
        ker_a: null_basis(a, tol),
        ker_a_star: null_basis(&a.adjoint(), tol),
        ker_s_star: null_basis(&s.adjoint(), tol),
        unitary_part: u,
        shift_part: s,
        h_u,
        h_s,
    };

    // u*u = uu* = projection onto H_u, and H_u ⊥ H_s.
    let uu = split.unitary_part.adjoint() * &split.unitary_part;
    let r1 = operator_norm(&(&uu - &split.unitary_part * split.unitary_part.adjoint()));
    let r2 = operator_norm(&(&uu - &p_u));
    let r3 = if split.h_u.ncols() > 0 && split.h_s.ncols() > 0 {
        operator_norm(&(split.h_u.adjoint() * &split.h_s))
    } else {
        0.0
    };
    let worst = r1.max(r2).max(r3);
    if worst > tol * 100.0 {
        return Err(NumericError::WoldValidation(worst));
    }
    Ok(split)
}

/// The numerical *-isomorphic index; all entries finite (truncation).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct NumericIndex {
    pub eps0: usize,
    pub eps_plus: usize,
    pub eps_minus: usize,
    pub eps_minus_minus: usize,
}

impl NumericIndex {
    pub fn as_star_index(&self) -> StarIndex {
        StarIndex {
            eps0: ExtNat::Fin(self.eps0 as u64),
            eps_plus: ExtNat::Fin(self.eps_plus as u64),
            eps_minus: ExtNat::Fin(self.eps_minus as u64),
            eps_minus_minus: ExtNat::Fin(self.eps_minus_minus as u64),
        }
    }
}

/// (dim H_u, dim ker a, dim ker s*, dim ker a* − dim ker s*) by rank
/// computations.
///
/// ε⁻ is taken as rank(s) − rank(s²): within the truncated shift block this
/// equals the defect and it is stable under truncation (the literal kernel
/// of the embedded s would count the unitary block and the dead zone too).
/// Requires the truncation to be at least twice the defect deep.
pub fn star_index_numeric(a: &CMatrix, tol: f64) -> Result<NumericIndex, NumericError> {
    let split = wold_split(a, tol)?;
    let n = a.nrows();
    let s = &split.shift_part;
    let eps_minus = if operator_norm(s) <= tol {
        0
    } else {
        rank(s, tol) - rank(&(s * s), tol)
    };
    let ker_a_star = n - rank(a, tol);
    Ok(NumericIndex {
        eps0: split.h_u.ncols(),
        eps_plus: n - rank(a, tol),
        eps_minus,
        eps_minus_minus: ker_a_star - eps_minus,
    })
}

// ---------------------------------------------------------------------------
// Subspace lattice (∧_π / ∨_π)
// ---------------------------------------------------------------------------

/// The π-conditional meet and join of two subspaces: intersection and closed
/// span when admissible; otherwise meet = {0} and join = the external direct
/// sum (block-stacked bases in ℂ^{2n}, so the dimension adds).
pub fn subspace_meet_join(
    bx: &CMatrix,
    by: &CMatrix,
    admissible: bool,
    tol: f64,
) -> (CMatrix, CMatrix) {
    let n = bx.nrows();
    if admissible {
        let meet = subspace_intersection(bx, by, tol);
        let mut stacked = CMatrix::zeros(n, bx.ncols() + by.ncols());
        stacked.view_mut((0, 0), (n, bx.ncols())).copy_from(bx);
        stacked.view_mut((0, bx.ncols()), (n, by.ncols())).copy_from(by);
        let join = range_basis(&stacked, tol);
        (meet, join)
    } else {
        let meet = CMatrix::zeros(n, 0);
        let mut join = CMatrix::zeros(2 * n, bx.ncols() + by.ncols());
        join.view_mut((0, 0), (n, bx.ncols())).copy_from(bx);
        join.view_mut((n, bx.ncols()), (n, by.ncols())).copy_from(by);
        (meet, join)
    }
}

// ---------------------------------------------------------------------------
// Cayley transform
// ---------------------------------------------------------------------------

fn identity_like(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

fn scaled_identity(n: usize, z: Complex64) -> CMatrix {
    identity_like(n) * z
}

/// U = (T + i)(T − i)⁻¹ for Hermitian T; always unitary on a finite space.
pub fn cayley_of_selfadjoint(t: &CMatrix, tol: f64) -> Result<CMatrix, NumericError> {
    if t.nrows() != t.ncols() {
        return Err(NumericError::NotSquare);
    }
    let herm = operator_norm(&(t.adjoint() - t));
    if herm > tol {
        return Err(NumericError::NotHermitian(herm));
    }
    let n = t.nrows();
    let i = Complex64::new(0.0, 1.0);
    let minus = t - scaled_identity(n, i);
    let inv = minus.lu().try_inverse().ok_or(NumericError::UnitInSpectrum)?;
    let u = (t + scaled_identity(n, i)) * inv;
    let res = operator_norm(&(u.adjoint() * &u - identity_like(n)));
    if res > tol.max(1e-10) * 100.0 {
        return Err(NumericError::NotUnitary(res));
    }
    Ok(u)
}

/// T = i(U + 1)(U − 1)⁻¹ for unitary U with 1 outside the spectrum.
pub fn inverse_cayley(u: &CMatrix, tol: f64) -> Result<CMatrix, NumericError> {
    if u.nrows() != u.ncols() {
        return Err(NumericError::NotSquare);
    }
    let n = u.nrows();
    let res = operator_norm(&(u.adjoint() * u - identity_like(n)));
    if res > tol {
        return Err(NumericError::NotUnitary(res));
    }
    let minus = u - identity_like(n);
    // 1 in the spectrum is the obstruction analog: U − 1 is singular.
    let sv = minus.clone().svd(false, false).singular_values;
    if sv.min() <= tol {
        return Err(NumericError::UnitInSpectrum);
    }
    let inv = minus.lu().try_inverse().ok_or(NumericError::UnitInSpectrum)?;
    let t = (u + identity_like(n)) * inv * Complex64::new(0.0, 1.0);
    Ok(t)
}

/// Rank-one operator W = |e₋⟩⟨e₊| with α = ⟨e₊, e₋⟩.
#[derive(Debug, Clone)]
pub struct DefectData {
    pub e_plus: CVector,
    pub e_minus: CVector,
    pub alpha: Complex64,
    pub w: CMatrix,
}

/// Builds |e₋⟩⟨e₊| from unit vectors and verifies W² = αW and
/// W^{n+1} = αⁿW for n ≤ 20.
pub fn rank1_defect(e_plus: &CVector, e_minus: &CVector) -> Result<DefectData, NumericError> {
    if e_plus.nrows() != e_minus.nrows() {
        return Err(NumericError::DimensionMismatch);
    }
    if (e_plus.norm() - 1.0).abs() > 1e-10 || (e_minus.norm() - 1.0).abs() > 1e-10 {
        return Err(NumericError::NotUnitVector);
    }
    let w: CMatrix = e_minus * e_plus.adjoint();
    let alpha = (e_plus.adjoint() * e_minus)[(0, 0)];
    let mut power = &w * &w;
    let mut alpha_n = alpha;
    for _ in 1..=20 {
        let res = operator_norm(&(&power - &w * alpha_n));
        if res > 1e-12 {
            return Err(NumericError::DefectIdentity(res));
        }
        power = &power * &w;
        alpha_n *= alpha;
    }
    Ok(DefectData { e_plus: e_plus.clone(), e_minus: e_minus.clone(), alpha, w })
}

/// U = V ⊕ W: extends a partial isometry with one-dimensional defects to a
/// unitary, after checking that e₊ spans ker V and e₋ spans ker V*. With no
/// defect data (W = 0) the input must already be unitary and is returned
/// unchanged.
pub fn unitary_extension(
    v: &CMatrix,
    defect: Option<&DefectData>,
    tol: f64,
) -> Result<CMatrix, NumericError> {
    if v.nrows() != v.ncols() {
        return Err(NumericError::NotSquare);
    }
    let n = v.nrows();
    let Some(defect) = defect else {
        let r = operator_norm(&(v.adjoint() * v - identity_like(n)));
        if r > tol {
            return Err(NumericError::NotUnitary(r));
        }
        return Ok(v.clone());
    };
    if v.nrows() != defect.e_plus.nrows() {
        return Err(NumericError::DimensionMismatch);
    }
    let spans = |basis: &CMatrix, vector: &CVector| {
        basis.ncols() == 1 && {
            let overlap = (basis.adjoint() * vector)[(0, 0)].norm();
            (overlap - 1.0).abs() <= tol.max(1e-9) * 100.0
        }
    };
    let ker_v = null_basis(v, tol);
    let ker_v_star = null_basis(&v.adjoint(), tol);
    if !spans(&ker_v, &defect.e_plus) || !spans(&ker_v_star, &defect.e_minus) {
        return Err(NumericError::DefectMismatch);
    }
    let u = v + &defect.w;
    let r = operator_norm(&(u.adjoint() * &u - identity_like(n)))
        .max(operator_norm(&(&u * u.adjoint() - identity_like(n))));
    if r > tol {
        return Err(NumericError::NotUnitary(r));
    }
    Ok(u)
}

// ---------------------------------------------------------------------------
// Random instances (seeded by the caller)
// ---------------------------------------------------------------------------

pub fn random_complex_matrix(n: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMatrix {
    let r = random_complex_matrix(n, rng);
    (&r + r.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn random_unit_vector(n: usize, rng: &mut impl Rng) -> CVector {
    loop {
        let v = CVector::from_fn(n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let norm = v.norm();
        if norm > 1e-3 {
            return v / Complex64::new(norm, 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = DEFAULT_TOL;

    fn zero() -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    #[test]
    fn truncated_shift_is_partial_isometry() {
        for (k, n) in [(1, 3), (2, 5), (3, 8), (5, 64)] {
            let a = make_truncated_shift(k, n).unwrap();
            assert!(is_partial_isometry(&a, 1e-12).unwrap());
            // A*A = diag(1 on first n-k, 0 after)
            let p = a.adjoint() * &a;
            for i in 0..n {
                let expected = if i < n - k { 1.0 } else { 0.0 };
                assert!((p[(i, i)].re - expected).abs() < 1e-14);
            }
        }
        assert!(make_truncated_shift(3, 3).is_err());
        assert!(make_truncated_shift(0, 3).is_err());
    }

    #[test]
    fn non_partial_isometry_detected() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = one();
        m[(0, 1)] = one();
        assert!(!is_partial_isometry(&m, TOL).unwrap());
        assert!(is_partial_isometry(&diag_unitary(&[0.3, 1.1]), TOL).unwrap());
    }

    #[test]
    fn projection_chain_for_shift() {
        let a = make_truncated_shift(1, 8).unwrap();
        let a2 = &a * &a;
        let p = &a2 * a2.adjoint();
        let q = &a * a.adjoint();
        assert!(projection_leq(&p, &q, TOL).unwrap());
        assert!(projection_leq(&p, &p, TOL).unwrap());
        // The range chain xx* ≥ x²x²* ≥ … survives truncation for all m
        // below the bound (the initial-space comparison x*x ≥ xx* does not).
        let a = make_truncated_shift(2, 16).unwrap();
        let mut power = a.clone();
        let mut prev = &power * power.adjoint();
        for _ in 2..=6 {
            power = &power * &a;
            let next = &power * power.adjoint();
            assert!(projection_leq(&next, &prev, TOL).unwrap());
            prev = next;
        }
        // Orthogonal rank-1 projections are incomparable.
        let mut e0 = CMatrix::zeros(2, 2);
        e0[(0, 0)] = one();
        let mut e1 = CMatrix::zeros(2, 2);
        e1[(1, 1)] = one();
        assert!(!projection_leq(&e0, &e1, TOL).unwrap());
        // The zero matrix is a projection and sits below everything.
        assert!(projection_leq(&CMatrix::zeros(2, 2), &e0, TOL).unwrap());
    }

    #[test]
    fn pi_numeric_cases() {
        let u = make_truncated_shift(1, 6).unwrap();
        let r = pi_numeric(&u, &u, TOL).unwrap();
        assert!(r.nonzero);
        // Block-disjoint operators.
        let a = direct_sum(&[make_truncated_shift(1, 4).unwrap(), CMatrix::zeros(4, 4)]);
        let b = direct_sum(&[CMatrix::zeros(4, 4), make_truncated_shift(1, 4).unwrap()]);
        let r = pi_numeric(&a, &b, TOL).unwrap();
        assert!(!r.nonzero);
        assert_eq!(r.case, PiCase::Zero);
        // Powers of one shift overlap.
        let r = pi_numeric(
            &make_truncated_shift(2, 12).unwrap(),
            &make_truncated_shift(4, 12).unwrap(),
            TOL,
        )
        .unwrap();
        assert!(r.nonzero);
        // A unitary initial space dominates any final projection.
        let x = diag_unitary(&[0.2; 6]);
        let r = pi_numeric(&x, &u, TOL).unwrap();
        assert_eq!(r.case, PiCase::FinalProjection);
        assert_eq!(pi_numeric(&x, &x, TOL).unwrap().case, PiCase::Equal);
    }

    #[test]
    fn pi_numeric_adjoint_symmetry() {
        // pi(x, y) nonzero iff pi(y*, x*) nonzero.
        let mats = vec![
            make_truncated_shift(2, 8).unwrap(),
            block_infinite_shift(4),
            diag_unitary(&[0.3; 8]),
            direct_sum(&[diag_unitary(&[0.4; 4]), CMatrix::zeros(4, 4)]),
        ];
        for x in &mats {
            for y in &mats {
                let fwd = pi_numeric(x, y, TOL).unwrap().nonzero;
                let bwd = pi_numeric(&y.adjoint(), &x.adjoint(), TOL).unwrap().nonzero;
                assert_eq!(fwd, bwd);
            }
        }
    }

    #[test]
    fn wold_split_unitary() {
        let a = diag_unitary(&[0.2, 0.9, 2.4]);
        let w = wold_split(&a, TOL).unwrap();
        assert_eq!(w.h_u.ncols(), 3);
        assert!(operator_norm(&w.shift_part) < 1e-12);
    }

    #[test]
    fn wold_split_pure_shift() {
        let a = make_truncated_shift(2, 10).unwrap();
        let w = wold_split(&a, TOL).unwrap();
        assert_eq!(w.h_u.ncols(), 0);
        assert!(operator_norm(&w.unitary_part) < 1e-12);
    }

    #[test]
    fn wold_split_mixed() {
        let a = direct_sum(&[diag_unitary(&[0.7; 4]), make_truncated_shift(1, 12).unwrap()]);
        let w = wold_split(&a, TOL).unwrap();
        assert_eq!(w.h_u.ncols(), 4);
        assert_eq!(w.h_s.ncols(), 11);
        // Re-splitting the unitary part leaves no shift.
        let w2 = wold_split(&w.unitary_part, TOL);
        // unitary_part is a partial isometry (unitary block plus zeros).
        let w2 = w2.unwrap();
        assert!(operator_norm(&w2.shift_part) < 1e-10);
    }

    #[test]
    fn index_examples() {
        let a = diag_unitary(&[0.1, 0.2, 0.3]);
        let i = star_index_numeric(&a, TOL).unwrap();
        assert_eq!((i.eps0, i.eps_plus, i.eps_minus, i.eps_minus_minus), (3, 0, 0, 0));

        let a = make_truncated_shift(2, 12).unwrap();
        let i = star_index_numeric(&a, TOL).unwrap();
        assert_eq!((i.eps0, i.eps_plus, i.eps_minus, i.eps_minus_minus), (0, 2, 2, 0));

        let a = make_truncated_shift(2, 5).unwrap();
        let i = star_index_numeric(&a, TOL).unwrap();
        assert_eq!(i.eps_minus, 2);

        let z = CMatrix::zeros(5, 5);
        let i = star_index_numeric(&z, TOL).unwrap();
        assert_eq!((i.eps0, i.eps_plus, i.eps_minus, i.eps_minus_minus), (0, 5, 0, 5));
    }

    #[test]
    fn index_diag_plus_shift_plus_kernel() {
        // The mixed-example shape: unitary block ⊕ defect-1 shift ⊕ zero block.
        let a = direct_sum(&[
            diag_unitary(&[1.3; 6]),
            make_truncated_shift(1, 20).unwrap(),
            CMatrix::zeros(6, 6),
        ]);
        let i = star_index_numeric(&a, TOL).unwrap();
        assert_eq!((i.eps0, i.eps_plus, i.eps_minus, i.eps_minus_minus), (6, 7, 1, 6));
    }

    #[test]
    fn meet_join_cases() {
        // Two overlapping coordinate planes in dimension 3: meet is the
        // shared axis.
        let bx = CMatrix::from_fn(3, 2, |r, c| {
            if (r, c) == (0, 0) || (r, c) == (1, 1) { one() } else { zero() }
        });
        let by = CMatrix::from_fn(3, 2, |r, c| {
            if (r, c) == (1, 0) || (r, c) == (2, 1) { one() } else { zero() }
        });
        let (meet, join) = subspace_meet_join(&bx, &by, true, TOL);
        assert_eq!(meet.ncols(), 1);
        assert_eq!(join.ncols(), 3);
        assert!((meet[(1, 0)].norm() - 1.0).abs() < 1e-10);

        let (meet, join) = subspace_meet_join(&bx, &by, false, TOL);
        assert_eq!(meet.ncols(), 0);
        assert_eq!(join.ncols(), 4);
        assert_eq!(join.nrows(), 6);

        let (meet, join) = subspace_meet_join(&bx, &bx, true, TOL);
        assert_eq!(meet.ncols(), 2);
        assert_eq!(join.ncols(), 2);
    }

    #[test]
    fn cayley_scalars() {
        // T = 0 → U = -1.
        let t = CMatrix::zeros(1, 1);
        let u = cayley_of_selfadjoint(&t, TOL).unwrap();
        assert!((u[(0, 0)] - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        // T = 1 → U = (1+i)/(1-i) = i.
        let mut t = CMatrix::zeros(1, 1);
        t[(0, 0)] = one();
        let u = cayley_of_selfadjoint(&t, TOL).unwrap();
        assert!((u[(0, 0)] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        // Inverse direction.
        let mut u = CMatrix::zeros(1, 1);
        u[(0, 0)] = Complex64::new(-1.0, 0.0);
        let t = inverse_cayley(&u, TOL).unwrap();
        assert!(t[(0, 0)].norm() < 1e-14);
        let mut u = CMatrix::zeros(1, 1);
        u[(0, 0)] = Complex64::new(0.0, 1.0);
        let t = inverse_cayley(&u, TOL).unwrap();
        assert!((t[(0, 0)] - one()).norm() < 1e-12);
    }

    #[test]
    fn cayley_roundtrip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2usize, 8, 16] {
            for _ in 0..10 {
                let t = random_hermitian(n, &mut rng);
                let u = cayley_of_selfadjoint(&t, TOL).unwrap();
                assert!(operator_norm(&(u.adjoint() * &u - CMatrix::identity(n, n))) <= 1e-10);
                let t2 = inverse_cayley(&u, 1e-9).unwrap();
                assert!(operator_norm(&(t2 - t)) <= ROUNDTRIP_TOL);
            }
        }
    }

    #[test]
    fn cayley_rejects_unit_spectrum() {
        let u = CMatrix::identity(3, 3);
        assert!(matches!(inverse_cayley(&u, TOL), Err(NumericError::UnitInSpectrum)));
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = one();
        assert!(matches!(cayley_of_selfadjoint(&m, TOL), Err(NumericError::NotHermitian(_))));
    }

    #[test]
    fn defect_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // Orthogonal pair: alpha = 0.
        let e0 = CVector::from_fn(3, |r, _| if r == 0 { one() } else { zero() });
        let e1 = CVector::from_fn(3, |r, _| if r == 1 { one() } else { zero() });
        let d = rank1_defect(&e0, &e1).unwrap();
        assert!(d.alpha.norm() < 1e-14);
        assert!(operator_norm(&(&d.w * &d.w)) < 1e-14);
        // Equal pair: alpha = 1, W a projection.
        let d = rank1_defect(&e0, &e0).unwrap();
        assert!((d.alpha - one()).norm() < 1e-14);
        assert!(operator_norm(&(&d.w * &d.w - &d.w)) < 1e-14);
        // Random pair: ||W^n|| = |alpha|^{n-1}.
        let ep = random_unit_vector(6, &mut rng);
        let em = random_unit_vector(6, &mut rng);
        let d = rank1_defect(&ep, &em).unwrap();
        let mut power = d.w.clone();
        for n in 1..=8 {
            let expected = d.alpha.norm().powi(n - 1);
            assert!((operator_norm(&power) - expected).abs() < 1e-10);
            power = &power * &d.w;
        }
        // Non-unit vector rejected.
        assert!(rank1_defect(&(e0.clone() * Complex64::new(2.0, 0.0)), &e1).is_err());
    }

    #[test]
    fn shift_extension_is_cyclic_permutation() {
        let n = 6;
        let v = make_truncated_shift(1, n).unwrap();
        let e_plus = CVector::from_fn(n, |r, _| if r == n - 1 { one() } else { zero() });
        let e_minus = CVector::from_fn(n, |r, _| if r == 0 { one() } else { zero() });
        let d = rank1_defect(&e_plus, &e_minus).unwrap();
        let u = unitary_extension(&v, Some(&d), TOL).unwrap();
        assert!((u[(0, n - 1)] - one()).norm() < 1e-14);
        for i in 0..n - 1 {
            assert!((u[(i + 1, i)] - one()).norm() < 1e-14);
        }
        // Mismatched defect vector.
        let wrong = rank1_defect(&e_minus, &e_plus).unwrap();
        assert!(matches!(
            unitary_extension(&v, Some(&wrong), TOL),
            Err(NumericError::DefectMismatch)
        ));
        // Already unitary with no defect: U = V.
        let w = diag_unitary(&[0.1, 0.4, 0.9]);
        assert_eq!(unitary_extension(&w, None, TOL).unwrap(), w);
        assert!(matches!(
            unitary_extension(&make_truncated_shift(1, 3).unwrap(), None, TOL),
            Err(NumericError::NotUnitary(_))
        ));
    }
}
