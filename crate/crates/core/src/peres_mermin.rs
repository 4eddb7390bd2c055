//! The 3×3 magic square of two-qubit observables, its operator constraints,
//! and exhaustive searches over noncontextual ±1 value assignments.
//!
//! Subsystem 1 of the square is the neutron spin, subsystem 2 its path.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    bell_state, expectation, tensor_observable, AlgebraError, Operator, Pauli, StateVector,
};
use crate::scalar::{RealScalar, Scalar};

/// Tolerance for "product equals ±identity".
pub const PRODUCT_TOLERANCE: f64 = 1e-10;
/// Tolerance for vanishing commutators and the reported signs.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PeresMerminError {
    #[error("{line} product deviates from ±identity by {deviation:e}")]
    NotProportionalToIdentity { line: String, deviation: f64 },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Clone)]
pub struct MagicSquare<T: Scalar> {
    pub grid: [[Operator<T>; 3]; 3],
}

impl<T: Scalar> MagicSquare<T> {
    pub fn row(&self, r: usize) -> [&Operator<T>; 3] {
        [&self.grid[r][0], &self.grid[r][1], &self.grid[r][2]]
    }

    pub fn column(&self, c: usize) -> [&Operator<T>; 3] {
        [&self.grid[0][c], &self.grid[1][c], &self.grid[2][c]]
    }
}

/// Builds the square row by row:
///
/// ```text
/// σx^s        σx^p        σx^s·σx^p
/// σy^p        σy^s        σy^s·σy^p
/// σx^s σy^p   σy^s σx^p   σz^s·σz^p
/// ```
pub fn build_magic_square<T: Scalar>() -> MagicSquare<T> {
    use Pauli::{I, X, Y, Z};
    let t = tensor_observable::<T>;
    MagicSquare {
        grid: [
            [t(X, I), t(I, X), t(X, X).with_label("σx^s·σx^p")],
            [t(I, Y), t(Y, I), t(Y, Y).with_label("σy^s·σy^p")],
            [t(X, Y), t(Y, X), t(Z, Z).with_label("σz^s·σz^p")],
        ],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareVerification {
    pub row_signs: [i32; 3],
    pub col_signs: [i32; 3],
    pub compatible: bool,
    /// Largest deviation of any line product from its ±identity.
    pub max_product_deviation: f64,
    /// Largest entry of any within-line commutator.
    pub max_commutator: f64,
}

fn line_sign<T: Scalar>(
    ops: [&Operator<T>; 3],
    line: String,
) -> Result<(i32, f64), PeresMerminError> {
    let product = &(ops[0] * ops[1]) * ops[2];
    let deviation = product.distance_to_signed_identity();
    if deviation > PRODUCT_TOLERANCE {
        return Err(PeresMerminError::NotProportionalToIdentity { line, deviation });
    }
    let sign = product
        .identity_sign(PRODUCT_TOLERANCE)
        .expect("within tolerance of ±identity");
    Ok((sign, deviation))
}

fn max_pairwise_commutator<T: Scalar>(ops: [&Operator<T>; 3]) -> f64 {
    let zero = Operator::zero();
    let mut worst = 0.0_f64;
    for i in 0..3 {
        for j in i + 1..3 {
            worst = worst.max(crate::algebra::commutator(ops[i], ops[j]).max_deviation(&zero));
        }
    }
    worst
}

/// Left-to-right products of every row and column, plus compatibility.
pub fn verify_square<T: Scalar>(
    square: &MagicSquare<T>,
) -> Result<SquareVerification, PeresMerminError> {
    let mut row_signs = [0; 3];
    let mut col_signs = [0; 3];
    let mut max_product_deviation = 0.0_f64;
    let mut max_commutator = 0.0_f64;
    for k in 0..3 {
        let (s, d) = line_sign(square.row(k), format!("row {}", k + 1))?;
        row_signs[k] = s;
        max_product_deviation = max_product_deviation.max(d);
        let (s, d) = line_sign(square.column(k), format!("column {}", k + 1))?;
        col_signs[k] = s;
        max_product_deviation = max_product_deviation.max(d);
        max_commutator = max_commutator
            .max(max_pairwise_commutator(square.row(k)))
            .max(max_pairwise_commutator(square.column(k)));
    }
    Ok(SquareVerification {
        row_signs,
        col_signs,
        compatible: max_commutator <= IDENTITY_TOLERANCE,
        max_product_deviation,
        max_commutator,
    })
}

/// Product constraint on three cells of the square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineConstraint {
    pub cells: [(usize, usize); 3],
    pub product: i8,
}

/// Three rows with product +1, then columns with +1, +1, −1.
pub fn magic_square_constraints() -> [LineConstraint; 6] {
    let row = |r: usize, product| LineConstraint { cells: [(r, 0), (r, 1), (r, 2)], product };
    let col = |c: usize, product| LineConstraint { cells: [(0, c), (1, c), (2, c)], product };
    [row(0, 1), row(1, 1), row(2, 1), col(0, 1), col(1, 1), col(2, -1)]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContradictionReport {
    pub satisfiable: bool,
    pub assignments_checked: u64,
    pub satisfying_assignments: u64,
}

/// Enumerates all 2⁹ ±1 fillings of the square against `constraints`.
///
/// Bit `3r + c` of the counter set means cell `(r, c)` holds −1.
pub fn search_assignments(constraints: &[LineConstraint]) -> ContradictionReport {
    let mut satisfying = 0;
    for bits in 0u32..(1 << 9) {
        let value = |(r, c): (usize, usize)| -> i8 {
            if bits >> (3 * r + c) & 1 == 1 {
                -1
            } else {
                1
            }
        };
        let ok = constraints
            .iter()
            .all(|k| k.cells.iter().map(|&cell| value(cell)).product::<i8>() == k.product);
        if ok {
            satisfying += 1;
        }
    }
    ContradictionReport {
        satisfiable: satisfying > 0,
        assignments_checked: 1 << 9,
        satisfying_assignments: satisfying,
    }
}

pub fn assignment_contradiction() -> ContradictionReport {
    search_assignments(&magic_square_constraints())
}

/// The six observables that enter the contextuality inequalities, as
/// abstract symbols for value assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Observable {
    #[serde(rename = "σx^s")]
    SpinX,
    #[serde(rename = "σx^p")]
    PathX,
    #[serde(rename = "σy^s")]
    SpinY,
    #[serde(rename = "σy^p")]
    PathY,
    #[serde(rename = "σx^s σy^p")]
    SpinXPathY,
    #[serde(rename = "σy^s σx^p")]
    SpinYPathX,
}

impl Observable {
    pub const ALL: [Observable; 6] = [
        Observable::SpinX,
        Observable::PathX,
        Observable::SpinY,
        Observable::PathY,
        Observable::SpinXPathY,
        Observable::SpinYPathX,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Observable::SpinX => "σx^s",
            Observable::PathX => "σx^p",
            Observable::SpinY => "σy^s",
            Observable::PathY => "σy^p",
            Observable::SpinXPathY => "σx^s σy^p",
            Observable::SpinYPathX => "σy^s σx^p",
        }
    }

    pub fn operator<T: Scalar>(self) -> Operator<T> {
        use Pauli::{I, X, Y};
        let (s, p) = match self {
            Observable::SpinX => (X, I),
            Observable::PathX => (I, X),
            Observable::SpinY => (Y, I),
            Observable::PathY => (I, Y),
            Observable::SpinXPathY => (X, Y),
            Observable::SpinYPathX => (Y, X),
        };
        tensor_observable(s, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityId {
    /// Five context terms over six independent symbols, classical bound 3.
    Full5Term,
    /// The three state-dependent terms, classical bound 1.
    Reduced3Term,
}

/// `coefficient · ⟨factor₀ · factor₁ · …⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Term {
    pub coefficient: i8,
    pub factors: &'static [Observable],
}

impl Term {
    /// The product inside the brackets, composite factors parenthesized.
    pub fn product_label(&self) -> String {
        let body: Vec<_> = self
            .factors
            .iter()
            .map(|o| if o.label().contains(' ') { format!("({})", o.label()) } else { o.label().to_owned() })
            .collect();
        body.join(" · ")
    }

    pub fn label(&self) -> String {
        format!("{}⟨{}⟩", if self.coefficient < 0 { "−" } else { "+" }, self.product_label())
    }
}

const XX: Term = Term { coefficient: -1, factors: &[Observable::SpinX, Observable::PathX] };
const YY: Term = Term { coefficient: -1, factors: &[Observable::SpinY, Observable::PathY] };
const XY_SEQ: Term = Term {
    coefficient: 1,
    factors: &[Observable::SpinXPathY, Observable::SpinX, Observable::PathY],
};
const YX_SEQ: Term = Term {
    coefficient: 1,
    factors: &[Observable::SpinYPathX, Observable::SpinY, Observable::PathX],
};
const BELL: Term = Term {
    coefficient: -1,
    factors: &[Observable::SpinXPathY, Observable::SpinYPathX],
};

impl InequalityId {
    pub const ALL: [InequalityId; 2] = [InequalityId::Full5Term, InequalityId::Reduced3Term];

    pub fn terms(self) -> &'static [Term] {
        match self {
            InequalityId::Full5Term => &[XX, YY, XY_SEQ, YX_SEQ, BELL],
            InequalityId::Reduced3Term => &[XX, YY, BELL],
        }
    }

    pub fn classical_bound(self) -> i32 {
        match self {
            InequalityId::Full5Term => 3,
            InequalityId::Reduced3Term => 1,
        }
    }

    /// Symbols enumerated freely; the rest are derived from them.
    fn free_symbols(self) -> &'static [Observable] {
        match self {
            InequalityId::Full5Term => &Observable::ALL,
            InequalityId::Reduced3Term => &[
                Observable::SpinX,
                Observable::PathX,
                Observable::SpinY,
                Observable::PathY,
            ],
        }
    }
}

/// A noncontextual assignment of ±1 to observable symbols.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NchvAssignment {
    pub values: BTreeMap<Observable, i8>,
}

impl NchvAssignment {
    pub fn value(&self, o: Observable) -> i8 {
        self.values[&o]
    }

    /// Classical value of the inequality's left-hand side.
    pub fn evaluate(&self, id: InequalityId) -> i32 {
        id.terms()
            .iter()
            .map(|t| {
                let v: i8 = t.factors.iter().map(|&o| self.value(o)).product();
                i32::from(t.coefficient) * i32::from(v)
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub inequality_id: InequalityId,
    pub classical_max: i32,
    pub assignments_checked: u64,
    /// All maximizers, in enumeration order.
    pub maximizing_assignments: Vec<NchvAssignment>,
    pub qm_value: f64,
}

fn enumerate(id: InequalityId) -> impl Iterator<Item = NchvAssignment> {
    let free = id.free_symbols();
    (0u32..(1 << free.len())).map(move |bits| {
        let mut values: BTreeMap<Observable, i8> = free
            .iter()
            .enumerate()
            .map(|(k, &o)| (o, if bits >> k & 1 == 1 { -1 } else { 1 }))
            .collect();
        if id == InequalityId::Reduced3Term {
            let xy = values[&Observable::SpinX] * values[&Observable::PathY];
            let yx = values[&Observable::SpinY] * values[&Observable::PathX];
            values.insert(Observable::SpinXPathY, xy);
            values.insert(Observable::SpinYPathX, yx);
        }
        NchvAssignment { values }
    })
}

/// Exhaustive maximum of the inequality over noncontextual assignments,
/// alongside the quantum value on the Bell-like state.
pub fn classical_bound(id: InequalityId) -> Result<BoundReport, PeresMerminError> {
    let mut classical_max = i32::MIN;
    let mut maximizers = Vec::new();
    let mut checked = 0u64;
    for a in enumerate(id) {
        checked += 1;
        let v = a.evaluate(id);
        if v > classical_max {
            classical_max = v;
            maximizers.clear();
        }
        if v == classical_max {
            maximizers.push(a);
        }
    }
    Ok(BoundReport {
        inequality_id: id,
        classical_max,
        assignments_checked: checked,
        maximizing_assignments: maximizers,
        qm_value: qm_lhs(id, &bell_state::<f64>())?,
    })
}

/// ⟨factor₀ · factor₁ · …⟩ without the term's coefficient.
pub fn term_expectation<T: RealScalar>(
    term: &Term,
    state: &StateVector<T>,
) -> Result<T, AlgebraError> {
    let op = term
        .factors
        .iter()
        .map(|o| o.operator::<T>())
        .reduce(|acc, f| &acc * &f)
        .expect("terms have factors");
    expectation(&op, state)
}

/// Signed contribution of one term to the left-hand side.
pub fn qm_term<T: RealScalar>(term: &Term, state: &StateVector<T>) -> Result<T, AlgebraError> {
    let coefficient = T::from_f64_lossy(f64::from(term.coefficient));
    Ok(coefficient * term_expectation(term, state)?)
}

pub fn qm_lhs<T: RealScalar>(id: InequalityId, state: &StateVector<T>) -> Result<T, AlgebraError> {
    id.terms()
        .iter()
        .try_fold(T::zero(), |acc, t| Ok(acc + qm_term(t, state)?))
}
