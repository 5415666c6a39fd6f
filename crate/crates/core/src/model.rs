//! Problem instances, actuation schedules, validation and the JSON file format.
//!
//! An instance file looks like
//!
//! ```json
//! {"A": [[1.1, 1.0], [0.0, 1.1]], "B": [[0.1, 0.0], [0.0, 0.1]],
//!  "x0": [1.0, 1.0], "N": 5, "d": 2,
//!  "Q": {"scalar": 0.1}, "R": [[1.0, 0.0], [0.0, 1.0]]}
//! ```
//!
//! `x0` may be replaced by a covariance `"sigma": [[...]]`. Weights accept a
//! single matrix (replicated over the horizon), a scalar-times-identity
//! shorthand (`{"scalar": s}` or the string `"s*I"`), or one matrix per step
//! (`N + 1` for `Q`, `N` for `R`). `"QN"` overrides the terminal weight when
//! `Q` is not given per step.

use std::fmt;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, min_eigenvalue};

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const PSD_FLOOR: f64 = -1e-10;
pub const PD_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// Known initial state `x_0`.
    State(DVector<f64>),
    /// Zero-mean random initial state with covariance `Σ`.
    Covariance(DMatrix<f64>),
}

/// A sparsity-constrained LQR problem.
///
/// Fields are immutable after construction; use [`Instance::new`] (which
/// validates) or [`load_instance`].
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    init: InitialCondition,
    horizon: usize,
    budget: usize,
    q: Vec<DMatrix<f64>>,
    r: Vec<DMatrix<f64>>,
}

impl Instance {
    /// Builds and validates an instance. `q` holds `Q_0..Q_N`, `r` holds
    /// `R_0..R_{N-1}`.
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        init: InitialCondition,
        horizon: usize,
        budget: usize,
        q: Vec<DMatrix<f64>>,
        r: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        let inst = Self::new_unchecked(a, b, init, horizon, budget, q, r);
        let violations = validate(&inst);
        if violations.is_empty() {
            Ok(inst)
        } else {
            Err(Error::Invalid(violations))
        }
    }

    /// Builds an instance without checking any invariant. Pair with
    /// [`validate`] to inspect what is wrong with it.
    pub fn new_unchecked(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        init: InitialCondition,
        horizon: usize,
        budget: usize,
        q: Vec<DMatrix<f64>>,
        r: Vec<DMatrix<f64>>,
    ) -> Self {
        Instance {
            a,
            b,
            init,
            horizon,
            budget,
            q,
            r,
        }
    }

    /// Time-invariant weights: `Q_k = q` for every `k ≤ N`, `R_k = r`.
    pub fn time_invariant(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        init: InitialCondition,
        horizon: usize,
        budget: usize,
        q: DMatrix<f64>,
        r: DMatrix<f64>,
    ) -> Result<Self> {
        Self::new(
            a,
            b,
            init,
            horizon,
            budget,
            vec![q; horizon + 1],
            vec![r; horizon],
        )
    }

    /// Same instance with a different budget.
    pub fn with_budget(&self, budget: usize) -> Result<Self> {
        let mut out = self.clone();
        out.budget = budget;
        let violations = validate(&out);
        if violations.is_empty() {
            Ok(out)
        } else {
            Err(Error::Invalid(violations))
        }
    }

    /// Same plant and weights with a different initial condition.
    pub fn with_init(&self, init: InitialCondition) -> Result<Self> {
        let mut out = self.clone();
        out.init = init;
        let violations = validate(&out);
        if violations.is_empty() {
            Ok(out)
        } else {
            Err(Error::Invalid(violations))
        }
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn init(&self) -> &InitialCondition {
        &self.init
    }

    /// The deterministic initial state, if any.
    pub fn x0(&self) -> Option<&DVector<f64>> {
        match &self.init {
            InitialCondition::State(x) => Some(x),
            InitialCondition::Covariance(_) => None,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    /// State weight `Q_k`, `0 ≤ k ≤ N`.
    pub fn q(&self, k: usize) -> &DMatrix<f64> {
        &self.q[k]
    }

    /// Input weight `R_k`, `0 ≤ k < N`.
    pub fn r(&self, k: usize) -> &DMatrix<f64> {
        &self.r[k]
    }

    /// Largest singular value of `A`.
    pub fn spectral_norm(&self) -> f64 {
        self.a.clone().svd(false, false).singular_values.max()
    }

    pub fn state_weights(&self) -> &[DMatrix<f64>] {
        &self.q
    }

    pub fn input_weights(&self) -> &[DMatrix<f64>] {
        &self.r
    }
}

/// A set of actuation instants, stored sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Schedule(Vec<usize>);

impl Schedule {
    pub fn empty() -> Self {
        Schedule(Vec::new())
    }

    /// Validates `indices` against the horizon. Order does not matter;
    /// duplicates and indices `≥ horizon` are rejected.
    pub fn new(mut indices: Vec<usize>, horizon: usize) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Schedule(format!("duplicate time index {}", w[0])));
        }
        if let Some(&last) = indices.last() {
            if last >= horizon {
                return Err(Error::Schedule(format!(
                    "time index {last} outside horizon {horizon}"
                )));
            }
        }
        Ok(Schedule(indices))
    }

    /// `{0, …, horizon − 1}`.
    pub fn full(horizon: usize) -> Self {
        Schedule((0..horizon).collect())
    }

    /// `{0, …, d − 1}`.
    pub fn first(d: usize) -> Self {
        Schedule((0..d).collect())
    }

    /// Schedule from the set bits of `mask` (bit `i` ⇔ instant `i`).
    pub fn from_mask(mask: u64) -> Self {
        Schedule((0..64).filter(|i| mask >> i & 1 == 1).collect())
    }

    pub fn to_mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &i| m | 1 << i)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, omega: usize) -> bool {
        self.0.binary_search(&omega).is_ok()
    }

    /// `self ∪ {omega}`.
    pub fn with(&self, omega: usize) -> Self {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&omega) {
            v.insert(pos, omega);
        }
        Schedule(v)
    }

    /// Largest index plus one, or zero when empty.
    pub fn span(&self) -> usize {
        self.0.last().map_or(0, |&l| l + 1)
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, "}}")
    }
}

/// A broken instance invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    ZeroHorizon,
    ZeroBudget,
    BudgetExceedsHorizon { budget: usize, horizon: usize },
    Dimension(String),
    NonFinite { name: String },
    NotSymmetric { name: String, asymmetry: f64 },
    NotPsd { name: String, min_eigenvalue: f64 },
    NotPd { name: String, min_eigenvalue: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroHorizon => write!(f, "horizon must be positive"),
            Violation::ZeroBudget => write!(f, "budget must be at least 1"),
            Violation::BudgetExceedsHorizon { budget, horizon } => {
                write!(f, "budget exceeds horizon (d={budget}, N={horizon})")
            }
            Violation::Dimension(msg) => write!(f, "dimension mismatch: {msg}"),
            Violation::NonFinite { name } => write!(f, "{name} has non-finite entries"),
            Violation::NotSymmetric { name, asymmetry } => {
                write!(f, "{name} not symmetric (max asymmetry {asymmetry:e})")
            }
            Violation::NotPsd {
                name,
                min_eigenvalue,
            } => write!(
                f,
                "{name} not positive semidefinite (min eigenvalue {min_eigenvalue:e})"
            ),
            Violation::NotPd {
                name,
                min_eigenvalue,
            } => write!(
                f,
                "{name} not positive definite (min eigenvalue {min_eigenvalue:e})"
            ),
        }
    }
}

#[derive(Clone, Copy)]
enum Definiteness {
    Semi,
    Strict,
}

/// Shape, finiteness, symmetry, then definiteness; stops at the first failure.
fn check_weight(
    name: &str,
    m: &DMatrix<f64>,
    dim: usize,
    kind: Definiteness,
    out: &mut Vec<Violation>,
) {
    if m.shape() != (dim, dim) {
        out.push(Violation::Dimension(format!(
            "{name} is {}x{}, expected {dim}x{dim}",
            m.nrows(),
            m.ncols()
        )));
        return;
    }
    if m.iter().any(|x| !x.is_finite()) {
        out.push(Violation::NonFinite {
            name: name.to_string(),
        });
        return;
    }
    let asym = asymmetry(m);
    if asym > SYMMETRY_TOL {
        out.push(Violation::NotSymmetric {
            name: name.to_string(),
            asymmetry: asym,
        });
        return;
    }
    let lmin = min_eigenvalue(m);
    match kind {
        Definiteness::Semi if lmin < PSD_FLOOR => out.push(Violation::NotPsd {
            name: name.to_string(),
            min_eigenvalue: lmin,
        }),
        Definiteness::Strict if lmin < PD_FLOOR => out.push(Violation::NotPd {
            name: name.to_string(),
            min_eigenvalue: lmin,
        }),
        _ => {}
    }
}

/// Lists every broken invariant; empty iff the instance is valid.
pub fn validate(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = inst.a.nrows();

    if inst.horizon == 0 {
        out.push(Violation::ZeroHorizon);
    }
    if inst.budget == 0 {
        out.push(Violation::ZeroBudget);
    }
    if inst.budget > inst.horizon {
        out.push(Violation::BudgetExceedsHorizon {
            budget: inst.budget,
            horizon: inst.horizon,
        });
    }

    if n == 0 || inst.a.ncols() != n {
        out.push(Violation::Dimension(format!(
            "A is {}x{}, expected a nonempty square matrix",
            inst.a.nrows(),
            inst.a.ncols()
        )));
    }
    if inst.b.nrows() != n || inst.b.ncols() == 0 {
        out.push(Violation::Dimension(format!(
            "B is {}x{}, expected {n} rows and at least one column",
            inst.b.nrows(),
            inst.b.ncols()
        )));
    }
    if inst.a.iter().any(|x| !x.is_finite()) {
        out.push(Violation::NonFinite { name: "A".into() });
    }
    if inst.b.iter().any(|x| !x.is_finite()) {
        out.push(Violation::NonFinite { name: "B".into() });
    }
    let m = inst.b.ncols();

    match &inst.init {
        InitialCondition::State(x) => {
            if x.len() != n {
                out.push(Violation::Dimension(format!(
                    "x0 has length {}, expected {n}",
                    x.len()
                )));
            } else if x.iter().any(|v| !v.is_finite()) {
                out.push(Violation::NonFinite { name: "x0".into() });
            }
        }
        InitialCondition::Covariance(s) => {
            check_weight("sigma", s, n, Definiteness::Semi, &mut out)
        }
    }

    if inst.q.len() != inst.horizon + 1 {
        out.push(Violation::Dimension(format!(
            "expected {} state weights Q_0..Q_N, found {}",
            inst.horizon + 1,
            inst.q.len()
        )));
    }
    for (k, q) in inst.q.iter().enumerate() {
        check_weight(&format!("Q_{k}"), q, n, Definiteness::Semi, &mut out);
    }
    if inst.r.len() != inst.horizon {
        out.push(Violation::Dimension(format!(
            "expected {} input weights R_0..R_(N-1), found {}",
            inst.horizon,
            inst.r.len()
        )));
    }
    for (k, r) in inst.r.iter().enumerate() {
        check_weight(&format!("R_{k}"), r, m, Definiteness::Strict, &mut out);
    }
    out
}

type Rows = Vec<Vec<f64>>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum WeightSpec {
    Scalar { scalar: f64 },
    Shorthand(String),
    PerStep(Vec<Rows>),
    Shared(Rows),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    #[serde(rename = "A")]
    a: Rows,
    #[serde(rename = "B")]
    b: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma: Option<Rows>,
    #[serde(rename = "N")]
    horizon: usize,
    d: usize,
    #[serde(rename = "Q")]
    q: WeightSpec,
    #[serde(rename = "QN", default, skip_serializing_if = "Option::is_none")]
    qn: Option<Rows>,
    #[serde(rename = "R")]
    r: WeightSpec,
}

fn dim_error(msg: String) -> Error {
    Error::Invalid(vec![Violation::Dimension(msg)])
}

fn to_matrix(name: &str, rows: &Rows) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
        return Err(dim_error(format!(
            "{name}: row {bad} has {} entries, expected {ncols}",
            rows[bad].len()
        )));
    }
    Ok(DMatrix::from_row_iterator(
        nrows,
        ncols,
        rows.iter().flatten().copied(),
    ))
}

fn to_rows(m: &DMatrix<f64>) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn parse_shorthand(s: &str) -> Option<f64> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact == "I" {
        return Some(1.0);
    }
    compact.strip_suffix("*I")?.parse().ok()
}

/// Expands a weight spec into `count` matrices of size `dim`. The last
/// matrix is replaced by `terminal` when given and the spec is shared.
fn expand_weights(
    name: &str,
    spec: &WeightSpec,
    dim: usize,
    count: usize,
    terminal: Option<DMatrix<f64>>,
) -> Result<Vec<DMatrix<f64>>> {
    let shared = match spec {
        WeightSpec::Scalar { scalar } => DMatrix::identity(dim, dim) * *scalar,
        WeightSpec::Shorthand(s) => {
            let scale = parse_shorthand(s).ok_or_else(|| {
                dim_error(format!(
                    "{name}: unrecognised shorthand {s:?}, expected \"<s>*I\""
                ))
            })?;
            DMatrix::identity(dim, dim) * scale
        }
        WeightSpec::Shared(rows) => to_matrix(name, rows)?,
        WeightSpec::PerStep(list) => {
            let mut mats = list
                .iter()
                .enumerate()
                .map(|(k, rows)| to_matrix(&format!("{name}_{k}"), rows))
                .collect::<Result<Vec<_>>>()?;
            match (terminal, mats.len()) {
                (Some(t), len) if len + 1 == count => mats.push(t),
                (Some(_), _) => {
                    return Err(dim_error(format!(
                        "{name}N given together with {} per-step matrices (expected {})",
                        mats.len(),
                        count - 1
                    )))
                }
                (None, _) => {}
            }
            if mats.len() != count {
                return Err(dim_error(format!(
                    "{name}: expected {count} per-step matrices, found {}",
                    mats.len()
                )));
            }
            return Ok(mats);
        }
    };
    let mut mats = vec![shared; count];
    if let (Some(t), Some(last)) = (terminal, mats.last_mut()) {
        *last = t;
    }
    Ok(mats)
}

/// Parses and validates an instance from JSON text.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let a = to_matrix("A", &file.a)?;
    let b = to_matrix("B", &file.b)?;
    let n = a.nrows();
    let m = b.ncols();
    let init = match (file.x0, file.sigma) {
        (Some(x), None) => InitialCondition::State(DVector::from_vec(x)),
        (None, Some(s)) => InitialCondition::Covariance(to_matrix("sigma", &s)?),
        (Some(_), Some(_)) => {
            return Err(dim_error("give exactly one of x0 and sigma, not both".into()))
        }
        (None, None) => return Err(dim_error("missing initial condition (x0 or sigma)".into())),
    };
    let qn = file.qn.as_ref().map(|r| to_matrix("QN", r)).transpose()?;
    let q = expand_weights("Q", &file.q, n, file.horizon + 1, qn)?;
    let r = expand_weights("R", &file.r, m, file.horizon, None)?;
    Instance::new(a, b, init, file.horizon, file.d, q, r)
}

/// Serializes an instance with per-step weights; the inverse of
/// [`parse_instance`].
pub fn instance_to_json(inst: &Instance) -> String {
    let (x0, sigma) = match &inst.init {
        InitialCondition::State(x) => (Some(x.iter().copied().collect()), None),
        InitialCondition::Covariance(s) => (None, Some(to_rows(s))),
    };
    let file = InstanceFile {
        a: to_rows(&inst.a),
        b: to_rows(&inst.b),
        x0,
        sigma,
        horizon: inst.horizon,
        d: inst.budget,
        q: WeightSpec::PerStep(inst.q.iter().map(to_rows).collect()),
        qn: None,
        r: WeightSpec::PerStep(inst.r.iter().map(to_rows).collect()),
    };
    serde_json::to_string_pretty(&file).expect("instance serialization cannot fail")
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_instance(&text)
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = instance_to_json(inst);
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_instance() -> Instance {
        Instance::time_invariant(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            InitialCondition::State(DVector::from_element(1, 1.0)),
            2,
            1,
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn parses_bidiagonal_example() {
        let text = r#"{"A": [[1.1, 1], [0, 1.1]], "B": [[0.1, 0], [0, 0.1]],
            "x0": [1, 1], "N": 5, "d": 2, "Q": {"scalar": 0.1}, "R": {"scalar": 1}}"#;
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.state_dim(), 2);
        assert_eq!(inst.input_dim(), 2);
        assert_eq!(inst.state_weights().len(), 6);
        assert_eq!(inst.input_weights().len(), 5);
    }

    #[test]
    fn string_shorthand_expands_to_scaled_identity() {
        let text = r#"{"A": [[1,0,0,0,0],[0,1,0,0,0],[0,0,1,0,0],[0,0,0,1,0],[0,0,0,0,1]],
            "B": [[1],[0],[0],[0],[0]], "x0": [1,1,1,1,1], "N": 3, "d": 1,
            "Q": "0.1*I", "R": "I"}"#;
        let inst = parse_instance(text).unwrap();
        let expected = DMatrix::<f64>::identity(5, 5) * 0.1;
        for k in 0..=3 {
            assert_eq!(inst.q(k), &expected);
        }
        assert_eq!(inst.r(0), &DMatrix::identity(1, 1));
    }

    #[test]
    fn terminal_weight_override() {
        let text = r#"{"A": [[1]], "B": [[1]], "x0": [1], "N": 2, "d": 1,
            "Q": [[1]], "QN": [[5]], "R": [[1]]}"#;
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.q(0)[(0, 0)], 1.0);
        assert_eq!(inst.q(1)[(0, 0)], 1.0);
        assert_eq!(inst.q(2)[(0, 0)], 5.0);
    }

    #[test]
    fn zero_input_weight_is_not_pd() {
        let text = r#"{"A": [[1]], "B": [[1]], "x0": [1], "N": 2, "d": 1,
            "Q": [[1]], "R": [[[0]], [[1]]]}"#;
        match parse_instance(text) {
            Err(Error::Invalid(v)) => {
                assert!(matches!(&v[..], [Violation::NotPd { name, .. }] if name == "R_0"))
            }
            other => panic!("expected PD violation, got {other:?}"),
        }
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(parse_instance("{\"A\": "), Err(Error::Parse(_))));
    }

    #[test]
    fn ragged_matrix_is_a_dimension_error() {
        let text = r#"{"A": [[1, 0], [0]], "B": [[1], [1]], "x0": [1, 1], "N": 2, "d": 1,
            "Q": "I", "R": "I"}"#;
        assert!(matches!(
            parse_instance(text),
            Err(Error::Invalid(v)) if matches!(v[0], Violation::Dimension(_))
        ));
    }

    #[test]
    fn wrong_x0_length_is_a_dimension_error() {
        let text = r#"{"A": [[1]], "B": [[1]], "x0": [1, 2], "N": 2, "d": 1, "Q": "I", "R": "I"}"#;
        assert!(matches!(
            parse_instance(text),
            Err(Error::Invalid(v)) if matches!(v[..], [Violation::Dimension(_)])
        ));
    }

    #[test]
    fn indefinite_q_is_not_psd() {
        let text = r#"{"A": [[1]], "B": [[1]], "x0": [1], "N": 1, "d": 1, "Q": [[-1]], "R": "I"}"#;
        assert!(matches!(
            parse_instance(text),
            Err(Error::Invalid(v)) if matches!(&v[0], Violation::NotPsd { .. })
        ));
    }

    #[test]
    fn budget_exceeding_horizon() {
        let inst = scalar_instance();
        let bad = Instance::new_unchecked(
            inst.a().clone(),
            inst.b().clone(),
            inst.init().clone(),
            2,
            3,
            inst.state_weights().to_vec(),
            inst.input_weights().to_vec(),
        );
        let v = validate(&bad);
        assert_eq!(
            v,
            vec![Violation::BudgetExceedsHorizon {
                budget: 3,
                horizon: 2
            }]
        );
        assert!(v[0].to_string().contains("budget exceeds horizon"));
    }

    #[test]
    fn asymmetric_q1_is_reported_by_name() {
        let mut q = vec![DMatrix::<f64>::identity(2, 2); 3];
        q[1][(0, 1)] = 1e-3;
        let bad = Instance::new_unchecked(
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            InitialCondition::State(DVector::from_element(2, 1.0)),
            2,
            1,
            q,
            vec![DMatrix::identity(2, 2); 2],
        );
        let v = validate(&bad);
        assert_eq!(v.len(), 1);
        assert!(matches!(&v[0], Violation::NotSymmetric { name, .. } if name == "Q_1"));
        assert!(v[0].to_string().starts_with("Q_1 not symmetric"));
    }

    #[test]
    fn both_or_neither_initial_condition_rejected() {
        let both = r#"{"A": [[1]], "B": [[1]], "x0": [1], "sigma": [[1]], "N": 1, "d": 1, "Q": "I", "R": "I"}"#;
        let neither = r#"{"A": [[1]], "B": [[1]], "N": 1, "d": 1, "Q": "I", "R": "I"}"#;
        assert!(parse_instance(both).is_err());
        assert!(parse_instance(neither).is_err());
    }

    #[test]
    fn covariance_must_be_psd() {
        let text = r#"{"A": [[1]], "B": [[1]], "sigma": [[-2]], "N": 1, "d": 1, "Q": "I", "R": "I"}"#;
        assert!(matches!(
            parse_instance(text),
            Err(Error::Invalid(v)) if matches!(&v[0], Violation::NotPsd { name, .. } if name == "sigma")
        ));
    }

    #[test]
    fn schedule_rejects_duplicates_and_out_of_range() {
        assert!(Schedule::new(vec![1, 1], 3).is_err());
        assert!(Schedule::new(vec![3], 3).is_err());
        let s = Schedule::new(vec![2, 0], 3).unwrap();
        assert_eq!(s.indices(), &[0, 2]);
        assert_eq!(s.to_string(), "{0,2}");
        assert_eq!(Schedule::from_mask(s.to_mask()), s);
        assert_eq!(s.with(1).indices(), &[0, 1, 2]);
        assert_eq!(s.with(2), s);
    }
}
