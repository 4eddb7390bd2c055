//! Complex linear algebra on the four-dimensional spin ⊗ path space.
//!
//! Basis order is spin-major and fixed everywhere in the crate:
//!
//! | index | ket      |
//! |-------|----------|
//! | 0     | \|↑, I⟩  |
//! | 1     | \|↑, II⟩ |
//! | 2     | \|↓, I⟩  |
//! | 3     | \|↓, II⟩ |
//!
//! Spin up is the +1 eigenstate of σz on the spin factor, path I is the +1
//! eigenstate of σz on the path factor.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{RealScalar, Scalar};

pub const DIM: usize = 4;

pub type Amplitudes<T> = [Complex<T>; DIM];
type Matrix2<T> = [[Complex<T>; 2]; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NonHermitian { deviation: f64 },
    #[error("state is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("cannot normalize the zero vector")]
    ZeroVector,
    #[error("operator is not unitary (norm drift {drift:e})")]
    NotUnitary { drift: f64 },
}

/// Single-qubit Pauli label, `I` included so that local observables can be
/// written as tensor products with the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const AXES: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    fn symbol(self) -> &'static str {
        match self {
            Pauli::I => "1",
            Pauli::X => "σx",
            Pauli::Y => "σy",
            Pauli::Z => "σz",
        }
    }

    fn matrix<T: Scalar>(self) -> Matrix2<T> {
        let o = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let i = Complex::new(T::zero(), T::one());
        match self {
            Pauli::I => [[one, o], [o, one]],
            Pauli::X => [[o, one], [one, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[one, o], [o, -one]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    Spin,
    Path,
}

impl Subsystem {
    fn suffix(self) -> &'static str {
        match self {
            Subsystem::Spin => "^s",
            Subsystem::Path => "^p",
        }
    }
}

/// Index of `|spin, path⟩` in the fixed basis.
pub fn basis_index(spin_down: bool, path_two: bool) -> usize {
    2 * usize::from(spin_down) + usize::from(path_two)
}

/// A 4×4 complex matrix with an optional symbolic name.
#[derive(Clone, PartialEq)]
pub struct Operator<T> {
    entries: [[Complex<T>; DIM]; DIM],
    label: Option<String>,
}

impl<T: Scalar> fmt::Debug for Operator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Operator")
            .field("label", &self.label)
            .field("entries", &self.entries)
            .finish()
    }
}

fn czero<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

fn cabs_f64<T: Scalar>(z: Complex<T>) -> f64 {
    z.re.as_f64().hypot(z.im.as_f64())
}

impl<T: Scalar> Operator<T> {
    pub fn from_entries(entries: [[Complex<T>; DIM]; DIM]) -> Self {
        Self { entries, label: None }
    }

    pub fn zero() -> Self {
        Self::from_entries([[czero(); DIM]; DIM])
    }

    pub fn identity() -> Self {
        let mut op = Self::zero();
        for k in 0..DIM {
            op.entries[k][k] = Complex::new(T::one(), T::zero());
        }
        op.label = Some("1".to_owned());
        op
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn entries(&self) -> &[[Complex<T>; DIM]; DIM] {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex<T> {
        self.entries[row][col]
    }

    /// Kronecker product `spin ⊗ path` of two 2×2 blocks.
    fn kron(spin: &Matrix2<T>, path: &Matrix2<T>) -> Self {
        let mut op = Self::zero();
        for (sr, srow) in spin.iter().enumerate() {
            for (sc, s) in srow.iter().enumerate() {
                for (pr, prow) in path.iter().enumerate() {
                    for (pc, p) in prow.iter().enumerate() {
                        op.entries[2 * sr + pr][2 * sc + pc] = *s * *p;
                    }
                }
            }
        }
        op
    }

    pub fn scaled(&self, factor: Complex<T>) -> Self {
        let mut out = self.clone();
        for row in out.entries.iter_mut() {
            for z in row.iter_mut() {
                *z = *z * factor;
            }
        }
        out.label = None;
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for r in 0..DIM {
            for c in 0..DIM {
                out.entries[r][c] = self.entries[c][r].conj();
            }
        }
        out
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..DIM {
            for c in 0..DIM {
                worst = worst.max(cabs_f64(self.entries[r][c] - other.entries[r][c]));
            }
        }
        worst
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_deviation(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// `Some(+1)` or `Some(-1)` if the operator equals ±identity within `tol`.
    pub fn identity_sign(&self, tol: f64) -> Option<i32> {
        let id = Self::identity();
        if self.max_deviation(&id) <= tol {
            Some(1)
        } else if self.max_deviation(&id.scaled(Complex::new(-T::one(), T::zero()))) <= tol {
            Some(-1)
        } else {
            None
        }
    }

    /// Distance to the nearer of +identity and −identity.
    pub fn distance_to_signed_identity(&self) -> f64 {
        let id = Self::identity();
        let minus = id.scaled(Complex::new(-T::one(), T::zero()));
        self.max_deviation(&id).min(self.max_deviation(&minus))
    }

    pub fn apply(&self, v: &Amplitudes<T>) -> Amplitudes<T> {
        let mut out = [czero(); DIM];
        for (r, o) in out.iter_mut().enumerate() {
            for (c, x) in v.iter().enumerate() {
                *o = *o + self.entries[r][c] * *x;
            }
        }
        out
    }
}

fn join_labels(a: Option<&str>, b: Option<&str>, sep: &str) -> Option<String> {
    Some(format!("{}{sep}{}", a?, b?))
}

impl<T: Scalar> Mul for &Operator<T> {
    type Output = Operator<T>;

    fn mul(self, rhs: &Operator<T>) -> Operator<T> {
        let mut out = Operator::zero();
        for r in 0..DIM {
            for c in 0..DIM {
                let mut acc = czero();
                for k in 0..DIM {
                    acc = acc + self.entries[r][k] * rhs.entries[k][c];
                }
                out.entries[r][c] = acc;
            }
        }
        out.label = join_labels(self.label(), rhs.label(), "·");
        out
    }
}

impl<T: Scalar> Add for &Operator<T> {
    type Output = Operator<T>;

    fn add(self, rhs: &Operator<T>) -> Operator<T> {
        let mut out = self.clone();
        for r in 0..DIM {
            for c in 0..DIM {
                out.entries[r][c] = out.entries[r][c] + rhs.entries[r][c];
            }
        }
        out.label = join_labels(self.label(), rhs.label(), " + ");
        out
    }
}

impl<T: Scalar> Sub for &Operator<T> {
    type Output = Operator<T>;

    fn sub(self, rhs: &Operator<T>) -> Operator<T> {
        let mut out = self.clone();
        for r in 0..DIM {
            for c in 0..DIM {
                out.entries[r][c] = out.entries[r][c] - rhs.entries[r][c];
            }
        }
        out.label = join_labels(self.label(), rhs.label(), " − ");
        out
    }
}

/// σ_axis on one subsystem, identity on the other.
pub fn pauli<T: Scalar>(axis: Pauli, subsystem: Subsystem) -> Operator<T> {
    let id = Pauli::I.matrix::<T>();
    let m = axis.matrix::<T>();
    let op = match subsystem {
        Subsystem::Spin => Operator::kron(&m, &id),
        Subsystem::Path => Operator::kron(&id, &m),
    };
    match axis {
        Pauli::I => op.with_label("1"),
        _ => op.with_label(format!("{}{}", axis.symbol(), subsystem.suffix())),
    }
}

/// `σ_spin ⊗ σ_path`. Passing `Pauli::I` for both yields the identity.
pub fn tensor_observable<T: Scalar>(spin: Pauli, path: Pauli) -> Operator<T> {
    let op = Operator::kron(&spin.matrix::<T>(), &path.matrix::<T>());
    let label = match (spin, path) {
        (Pauli::I, Pauli::I) => "1".to_owned(),
        (s, Pauli::I) => format!("{}^s", s.symbol()),
        (Pauli::I, p) => format!("{}^p", p.symbol()),
        (s, p) => format!("{}^s {}^p", s.symbol(), p.symbol()),
    };
    op.with_label(label)
}

/// `ab − ba`.
pub fn commutator<T: Scalar>(a: &Operator<T>, b: &Operator<T>) -> Operator<T> {
    let mut out = &(a * b) - &(b * a);
    out.label = join_labels(a.label(), b.label(), ", ").map(|s| format!("[{s}]"));
    out
}

/// Pure state on the spin ⊗ path space with unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    amplitudes: Amplitudes<T>,
}

fn norm_sqr_of<T: RealScalar>(a: &Amplitudes<T>) -> T {
    a.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

impl<T: RealScalar> StateVector<T> {
    /// Accepts amplitudes whose norm² is within the normalization threshold of 1.
    pub fn new(amplitudes: Amplitudes<T>) -> Result<Self, AlgebraError> {
        let n = norm_sqr_of(&amplitudes).as_f64();
        if !n.is_finite() || (n - 1.0).abs() > T::normalization_error_threshold() {
            return Err(AlgebraError::NotNormalized { norm_sqr: n });
        }
        Ok(Self { amplitudes })
    }

    pub fn normalized(amplitudes: Amplitudes<T>) -> Result<Self, AlgebraError> {
        let n = norm_sqr_of(&amplitudes);
        if n <= T::zero() || !n.is_finite() {
            return Err(AlgebraError::ZeroVector);
        }
        let inv = T::one() / n.sqrt();
        Ok(Self {
            amplitudes: amplitudes.map(|z| z * inv),
        })
    }

    pub fn basis(index: usize) -> Self {
        let mut amplitudes = [czero(); DIM];
        amplitudes[index] = Complex::new(T::one(), T::zero());
        Self { amplitudes }
    }

    /// `spin ⊗ path`, normalized.
    pub fn product(spin: [Complex<T>; 2], path: [Complex<T>; 2]) -> Result<Self, AlgebraError> {
        let mut amplitudes = [czero(); DIM];
        for (s, zs) in spin.iter().enumerate() {
            for (p, zp) in path.iter().enumerate() {
                amplitudes[2 * s + p] = *zs * *zp;
            }
        }
        Self::normalized(amplitudes)
    }

    pub fn amplitudes(&self) -> &Amplitudes<T> {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        norm_sqr_of(&self.amplitudes)
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .fold(czero(), |acc, (a, b)| acc + a.conj() * *b)
    }

    /// |⟨self|other⟩|².
    pub fn overlap_probability(&self, other: &Self) -> T {
        self.inner(other).norm_sqr()
    }

    pub fn apply_unitary(&self, unitary: &Operator<T>) -> Result<Self, AlgebraError> {
        let amplitudes = unitary.apply(&self.amplitudes);
        let drift = (norm_sqr_of(&amplitudes).as_f64() - 1.0).abs();
        if drift > T::norm_tolerance() {
            return Err(AlgebraError::NotUnitary { drift });
        }
        Ok(Self { amplitudes })
    }

    /// max_k |(Aψ)_k − λ ψ_k|.
    pub fn eigen_residual(&self, op: &Operator<T>, eigenvalue: T) -> f64 {
        let image = op.apply(&self.amplitudes);
        image
            .iter()
            .zip(self.amplitudes.iter())
            .map(|(a, b)| (*a - *b * eigenvalue).norm().as_f64())
            .fold(0.0, f64::max)
    }
}

/// (|↓, I⟩ − |↑, II⟩)/√2.
pub fn bell_state<T: RealScalar>() -> StateVector<T> {
    let h = T::FRAC_1_SQRT_2();
    let mut amplitudes = [czero(); DIM];
    amplitudes[basis_index(false, true)] = Complex::new(-h, T::zero());
    amplitudes[basis_index(true, false)] = Complex::new(h, T::zero());
    StateVector { amplitudes }
}

/// The two families of common eigenstates of σx^s σy^p and σy^s σx^p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellFamily {
    /// (|↓, I⟩ ± i|↑, II⟩)/√2; the product of the two observables is −1.
    Anticorrelated,
    /// (|↑, I⟩ ± i|↓, II⟩)/√2; the product of the two observables is +1.
    Correlated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

pub fn eigenstate<T: RealScalar>(family: BellFamily, sign: Sign) -> StateVector<T> {
    let h = T::FRAC_1_SQRT_2();
    let (first, second) = match family {
        BellFamily::Anticorrelated => (basis_index(true, false), basis_index(false, true)),
        BellFamily::Correlated => (basis_index(false, false), basis_index(true, true)),
    };
    let s = match sign {
        Sign::Plus => h,
        Sign::Minus => -h,
    };
    let mut amplitudes = [czero(); DIM];
    amplitudes[first] = Complex::new(h, T::zero());
    amplitudes[second] = Complex::new(T::zero(), s);
    StateVector { amplitudes }
}

/// ⟨ψ|A|ψ⟩ for Hermitian `A` and unit `ψ`.
pub fn expectation<T: RealScalar>(
    observable: &Operator<T>,
    state: &StateVector<T>,
) -> Result<T, AlgebraError> {
    let deviation = observable.hermiticity_deviation();
    if deviation > T::identity_tolerance() {
        return Err(AlgebraError::NonHermitian { deviation });
    }
    let n = state.norm_sqr().as_f64();
    if (n - 1.0).abs() > T::normalization_error_threshold() {
        return Err(AlgebraError::NotNormalized { norm_sqr: n });
    }
    let image = observable.apply(&state.amplitudes);
    let form = state
        .amplitudes
        .iter()
        .zip(image.iter())
        .fold(czero::<T>(), |acc, (a, b)| acc + a.conj() * *b);
    debug_assert!(form.im.abs().as_f64() < 1e-10_f64.max(T::identity_tolerance() * 100.0));
    Ok(form.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn pauli_z_spin_fixes_up_path_one() {
        let up_one = StateVector::<f64>::basis(basis_index(false, false));
        let z = pauli::<f64>(Pauli::Z, Subsystem::Spin);
        assert!(up_one.eigen_residual(&z, 1.0) < 1e-12);
    }

    #[test]
    fn x_times_y_is_i_z_on_each_subsystem() {
        for sub in [Subsystem::Spin, Subsystem::Path] {
            let xy = &pauli::<i64>(Pauli::X, sub) * &pauli::<i64>(Pauli::Y, sub);
            let iz = pauli::<i64>(Pauli::Z, sub).scaled(Complex::new(0, 1));
            assert_eq!(xy.max_deviation(&iz), 0.0);
        }
    }

    #[test]
    fn spin_and_path_paulis_commute() {
        for a in Pauli::AXES {
            for b in Pauli::AXES {
                let k = commutator(&pauli::<i64>(a, Subsystem::Spin), &pauli(b, Subsystem::Path));
                assert_eq!(k.max_deviation(&Operator::zero()), 0.0, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn commutator_of_same_subsystem_paulis() {
        let xs = pauli::<f64>(Pauli::X, Subsystem::Spin);
        let ys = pauli::<f64>(Pauli::Y, Subsystem::Spin);
        let zs = pauli::<f64>(Pauli::Z, Subsystem::Spin);
        assert!(commutator(&xs, &xs).max_deviation(&Operator::zero()) < 1e-12);
        // [σx, σy] = 2i σz, worked by hand on the 2×2 blocks
        let expected = zs.scaled(c(0.0, 2.0));
        assert!(commutator(&xs, &ys).max_deviation(&expected) < 1e-12);
    }

    #[test]
    fn every_local_and_product_observable_is_hermitian_involution() {
        let paulis = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        for s in paulis {
            for p in paulis {
                let op = tensor_observable::<f64>(s, p);
                assert!(op.is_hermitian(1e-12));
                assert_eq!((&op * &op).identity_sign(1e-12), Some(1));
            }
        }
    }

    #[test]
    fn tensor_observable_matches_local_product() {
        let lhs = tensor_observable::<i64>(Pauli::X, Pauli::Y);
        let rhs = &pauli::<i64>(Pauli::X, Subsystem::Spin) * &pauli(Pauli::Y, Subsystem::Path);
        assert_eq!(lhs.max_deviation(&rhs), 0.0);
        assert_eq!(lhs.label(), Some("σx^s σy^p"));
    }

    #[test]
    fn bell_state_amplitudes_and_norm() {
        let psi = bell_state::<f64>();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [c(0.0, 0.0), c(-h, 0.0), c(h, 0.0), c(0.0, 0.0)];
        assert_eq!(psi.amplitudes(), &expected);
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zz_flips_sign_of_bell_state() {
        // both populated kets have opposite σz values on spin and path
        let psi = bell_state::<f64>();
        let zz = tensor_observable::<f64>(Pauli::Z, Pauli::Z);
        assert!(psi.eigen_residual(&zz, -1.0) < 1e-12);
    }

    #[test]
    fn bell_state_eigenvalue_predictions() {
        let psi = bell_state::<f64>();
        let xy = tensor_observable::<f64>(Pauli::X, Pauli::Y);
        let yx = tensor_observable::<f64>(Pauli::Y, Pauli::X);
        let xs = tensor_observable::<f64>(Pauli::X, Pauli::I);
        let xp = tensor_observable::<f64>(Pauli::I, Pauli::X);
        let ys = tensor_observable::<f64>(Pauli::Y, Pauli::I);
        let yp = tensor_observable::<f64>(Pauli::I, Pauli::Y);
        let cases: [(Operator<f64>, f64); 5] = [
            (&xs * &xp, -1.0),
            (&ys * &yp, -1.0),
            (&(&xy * &xs) * &yp, 1.0),
            (&(&yx * &ys) * &xp, 1.0),
            (&xy * &yx, -1.0),
        ];
        for (op, lambda) in &cases {
            assert!(psi.eigen_residual(op, *lambda) < 1e-12, "{:?}", op.label());
        }
    }

    #[test]
    fn eigenstate_eigenvalues() {
        let xy = tensor_observable::<f64>(Pauli::X, Pauli::Y);
        let yx = tensor_observable::<f64>(Pauli::Y, Pauli::X);
        for sign in [Sign::Plus, Sign::Minus] {
            let s = f64::from(sign.value());
            let anti = eigenstate::<f64>(BellFamily::Anticorrelated, sign);
            assert!(anti.eigen_residual(&xy, s) < 1e-12);
            assert!(anti.eigen_residual(&yx, -s) < 1e-12);
            let corr = eigenstate::<f64>(BellFamily::Correlated, sign);
            assert!(corr.eigen_residual(&xy, s) < 1e-12);
            assert!(corr.eigen_residual(&yx, s) < 1e-12);
        }
    }

    #[test]
    fn eigenstates_are_orthonormal() {
        let states: Vec<StateVector<f64>> = [BellFamily::Anticorrelated, BellFamily::Correlated]
            .into_iter()
            .flat_map(|f| [Sign::Plus, Sign::Minus].map(|s| eigenstate(f, s)))
            .collect();
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((a.inner(b) - c(expected, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn bell_projection_probabilities() {
        let psi = bell_state::<f64>();
        for sign in [Sign::Plus, Sign::Minus] {
            let anti = eigenstate::<f64>(BellFamily::Anticorrelated, sign);
            let corr = eigenstate::<f64>(BellFamily::Correlated, sign);
            assert!((anti.overlap_probability(&psi) - 0.5).abs() < 1e-12);
            assert!(corr.overlap_probability(&psi).abs() < 1e-12);
        }
    }

    #[test]
    fn expectation_values_on_bell_state() {
        let psi = bell_state::<f64>();
        let xx = tensor_observable::<f64>(Pauli::X, Pauli::X);
        let yy = tensor_observable::<f64>(Pauli::Y, Pauli::Y);
        assert!((expectation(&xx, &psi).unwrap() + 1.0).abs() < 1e-12);
        assert!((expectation(&yy, &psi).unwrap() + 1.0).abs() < 1e-12);
        assert!((expectation(&Operator::identity(), &psi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sequential_product_is_identity_for_any_state() {
        let op = &(&tensor_observable::<f64>(Pauli::X, Pauli::Y)
            * &tensor_observable(Pauli::X, Pauli::I))
            * &tensor_observable(Pauli::I, Pauli::Y);
        let psi = StateVector::normalized([c(0.3, 0.1), c(-0.2, 0.7), c(0.5, 0.0), c(0.1, -0.4)])
            .unwrap();
        assert!((expectation(&op, &psi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expectation_rejects_non_hermitian() {
        let op = tensor_observable::<f64>(Pauli::X, Pauli::I).scaled(c(0.0, 1.0));
        let err = expectation(&op, &bell_state()).unwrap_err();
        assert!(matches!(err, AlgebraError::NonHermitian { .. }));
    }

    #[test]
    fn expectation_rejects_unnormalized_state() {
        let psi = StateVector { amplitudes: [c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)] };
        let err = expectation(&Operator::identity(), &psi).unwrap_err();
        assert!(matches!(err, AlgebraError::NotNormalized { .. }));
        assert!(StateVector::new(*psi.amplitudes()).is_err());
        assert_eq!(StateVector::<f64>::normalized([c(0.0, 0.0); 4]), Err(AlgebraError::ZeroVector));
    }

    #[test]
    fn single_precision_route_agrees() {
        let psi = bell_state::<f32>();
        let xx = tensor_observable::<f32>(Pauli::X, Pauli::X);
        assert!((expectation(&xx, &psi).unwrap() + 1.0).abs() < 1e-6);
    }

    #[test]
    fn apply_unitary_rejects_non_unitary() {
        let psi = bell_state::<f64>();
        let doubled = Operator::<f64>::identity().scaled(c(2.0, 0.0));
        assert!(matches!(psi.apply_unitary(&doubled), Err(AlgebraError::NotUnitary { .. })));
        let flipped = psi.apply_unitary(&tensor_observable(Pauli::Y, Pauli::Z)).unwrap();
        assert!((flipped.norm_sqr() - 1.0).abs() < 1e-12);
    }
}
