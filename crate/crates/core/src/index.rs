//! Extended-natural arithmetic and *-isomorphic indices.
//!
//! The index alphabet is ℕ ∪ {0, ∞} with absolute difference as its only
//! operation, subject to the convention ∞ − ∞ = 0. A partial isometry is
//! classified by the quadruple (ε₀, ε₊, ε⁻, ε⁻₋) of kernel/part dimensions,
//! and two indices are *-equivalent when they differ by (0, finite, finite, 0)
//! with matching unitary-part spectra.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::blocks::AlgebraExpr;
use crate::graph::SpectrumTag;

/// Element of ℕ ∪ {0, ∞}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExtNat {
    /// A finite non-negative integer.
    Fin(u64),
    /// The distinguished point ∞, larger than every finite value.
    Inf,
}

impl ExtNat {
    pub const ZERO: ExtNat = ExtNat::Fin(0);

    pub fn is_zero(self) -> bool {
        self == ExtNat::Fin(0)
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtNat::Fin(_))
    }

    /// Absolute difference with ∞ − ∞ = 0 and ∞ − finite = ∞.
    pub fn absdiff(self, other: ExtNat) -> ExtNat {
        match (self, other) {
            (ExtNat::Inf, ExtNat::Inf) => ExtNat::Fin(0),
            (ExtNat::Inf, ExtNat::Fin(_)) | (ExtNat::Fin(_), ExtNat::Inf) => ExtNat::Inf,
            (ExtNat::Fin(a), ExtNat::Fin(b)) => ExtNat::Fin(a.abs_diff(b)),
        }
    }
}

impl From<u64> for ExtNat {
    fn from(n: u64) -> Self {
        ExtNat::Fin(n)
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Fin(n) => write!(f, "{n}"),
            ExtNat::Inf => write!(f, "inf"),
        }
    }
}

/// Free-standing form of [`ExtNat::absdiff`].
pub fn extnat_absdiff(a: ExtNat, b: ExtNat) -> ExtNat {
    a.absdiff(b)
}

/// The quadruple (ε₀, ε₊, ε⁻, ε⁻₋) classifying one partial isometry:
/// dim of the unitary part, dim ker a, dim ker s*, and dim(ker a* ⊖ ker s*).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StarIndex {
    pub eps0: ExtNat,
    pub eps_plus: ExtNat,
    pub eps_minus: ExtNat,
    pub eps_minus_minus: ExtNat,
}

impl StarIndex {
    pub fn new(
        eps0: impl Into<ExtNat>,
        eps_plus: impl Into<ExtNat>,
        eps_minus: impl Into<ExtNat>,
        eps_minus_minus: impl Into<ExtNat>,
    ) -> Self {
        StarIndex {
            eps0: eps0.into(),
            eps_plus: eps_plus.into(),
            eps_minus: eps_minus.into(),
            eps_minus_minus: eps_minus_minus.into(),
        }
    }

    pub fn as_array(&self) -> [ExtNat; 4] {
        [self.eps0, self.eps_plus, self.eps_minus, self.eps_minus_minus]
    }
}

impl fmt::Display for StarIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.eps0, self.eps_plus, self.eps_minus, self.eps_minus_minus
        )
    }
}

/// Entrywise absolute difference of two indices.
pub fn index_subtract(i1: &StarIndex, i2: &StarIndex) -> StarIndex {
    StarIndex {
        eps0: i1.eps0.absdiff(i2.eps0),
        eps_plus: i1.eps_plus.absdiff(i2.eps_plus),
        eps_minus: i1.eps_minus.absdiff(i2.eps_minus),
        eps_minus_minus: i1.eps_minus_minus.absdiff(i2.eps_minus_minus),
    }
}

/// The index-equivalence predicate: two generators produce *-isomorphic
/// algebras exactly when their index difference is (0, k₁, k₂, 0) with
/// k₁, k₂ finite, under the standing hypothesis that the unitary-part
/// spectra agree (`spectra_equal`, the caller's responsibility).
///
/// One guard beyond the bare difference formula: the ε⁻ entries must vanish
/// together or not at all. A vanishing shift part against a nonvanishing one
/// produces classifications of different shapes even when the numeric
/// difference is finite, so such pairs are flagged not equivalent.
pub fn star_equivalent(i1: &StarIndex, i2: &StarIndex, spectra_equal: bool) -> bool {
    if !spectra_equal {
        return false;
    }
    if i1.eps_minus.is_zero() != i2.eps_minus.is_zero() {
        return false;
    }
    let d = index_subtract(i1, i2);
    d.eps0.is_zero() && d.eps_plus.is_finite() && d.eps_minus.is_finite() && d.eps_minus_minus.is_zero()
}

/// Classification table for the C*-algebra generated by a single partial
/// isometry with index `i` and unitary-part spectrum `spectrum_tag`:
///
/// * ε⁻ = 0 — a pure unitary part: (ℂ·1) ⊗ C(spec);
/// * ε₀ = 0, ε⁻ finite nonzero — a finite-defect shift: the Toeplitz algebra;
/// * ε₀ = 0, ε⁻ = ∞ — (ℂ·1) ⊗ M₂(ℂ);
/// * ε₀ > 0 and ε⁻ > 0 — the direct sum of the unitary-part block and the
///   shift-part block.
pub fn classify_single(i: &StarIndex, spectrum_tag: &SpectrumTag) -> AlgebraExpr {
    let unitary_block = AlgebraExpr::tensor(
        AlgebraExpr::scalar_unit(),
        AlgebraExpr::continuous_functions(spectrum_tag.clone()),
    );
    let shift_block = |eps_minus: ExtNat| match eps_minus {
        ExtNat::Inf => AlgebraExpr::tensor(AlgebraExpr::scalar_unit(), AlgebraExpr::matrix_alg(2)),
        ExtNat::Fin(_) => AlgebraExpr::toeplitz(),
    };
    match (i.eps0.is_zero(), i.eps_minus.is_zero()) {
        (_, true) => unitary_block,
        (true, false) => shift_block(i.eps_minus),
        (false, false) => {
            AlgebraExpr::direct_sum(vec![unitary_block, shift_block(i.eps_minus)]).normalize()
        }
    }
}
