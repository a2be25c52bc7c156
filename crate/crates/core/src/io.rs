//! JSON file formats for schemes, POVMs, observables, states and reports.
//!
//! Complex numbers are two-element arrays `[re, im]` and matrices are nested
//! row-major arrays. Every document states the complex encoding in its
//! header; scheme files also state the composite index convention. Loading
//! re-validates every mathematical invariant.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{CMatrix, CVector, Tolerance};
use crate::metrics::OutcomeDistribution;
use crate::observables::{DiscretePovm, HermitianObservable, PureState};
use crate::schemes::{InvarianceReport, MeasurementScheme};
use crate::Complex64;

pub const COMPLEX_ENCODING: &str = "[re, im]";
pub const INDEX_CONVENTION: &str = "system-major";

pub type Pair = [f64; 2];
pub type Rows = Vec<Vec<Pair>>;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("{} invariant violation(s): {}", .0.len(), join(.0))]
    Invariant(Vec<Error>),
}

fn join(errors: &[Error]) -> String {
    errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl FormatError {
    /// Usage and parse problems exit with 2, invariant violations with 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            FormatError::Invariant(_) => 1,
            _ => 2,
        }
    }
}

impl From<Error> for FormatError {
    fn from(e: Error) -> Self {
        FormatError::Invariant(vec![e])
    }
}

/// Parses a document, reporting schema errors with the path to the field.
pub fn from_text<T: DeserializeOwned>(text: &str) -> Result<T, FormatError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data => FormatError::Schema {
                path,
                message: inner.to_string(),
            },
            _ => FormatError::Parse(inner.to_string()),
        }
    })?;
    de.end().map_err(|e| FormatError::Parse(e.to_string()))?;
    Ok(value)
}

/// Canonical text: pretty-printed JSON with a trailing newline.
pub fn to_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

pub fn read_file<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_text(&text)
}

pub fn write_file<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    std::fs::write(path, to_text(value)).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn check_header(field: &str, found: &str, expected: &str) -> Result<(), FormatError> {
    if found == expected {
        Ok(())
    } else {
        Err(FormatError::Schema {
            path: field.to_string(),
            message: format!("expected \"{expected}\", found \"{found}\""),
        })
    }
}

pub fn vector_to_pairs(v: &CVector) -> Vec<Pair> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn pairs_to_vector(pairs: &[Pair]) -> CVector {
    CVector::from_iterator(pairs.len(), pairs.iter().map(|p| Complex64::new(p[0], p[1])))
}

pub fn matrix_to_rows(m: &CMatrix) -> Rows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Rebuilds a matrix from nested rows; ragged rows are rejected.
pub fn rows_to_matrix(rows: &Rows) -> Result<CMatrix, Error> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|row| row.len() != c) {
        return Err(Error::LengthMismatch {
            what: "matrix row",
            expected: c,
            found: bad.len(),
        });
    }
    Ok(CMatrix::from_fn(r, c, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

fn state_from_pairs(pairs: &[Pair], tol: Tolerance) -> Result<PureState, Error> {
    PureState::with_tolerance(pairs_to_vector(pairs), tol)
}

fn observable_from_rows(rows: &Rows, tol: Tolerance) -> Result<HermitianObservable, Error> {
    HermitianObservable::with_tolerance(rows_to_matrix(rows)?, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeFile {
    pub complex_encoding: String,
    pub index_convention: String,
    pub system_dim: usize,
    pub probe_dim: usize,
    pub probe_state: Vec<Pair>,
    pub coupling: Rows,
    pub pointer: Rows,
}

impl SchemeFile {
    pub fn from_scheme(s: &MeasurementScheme) -> Self {
        Self {
            complex_encoding: COMPLEX_ENCODING.into(),
            index_convention: INDEX_CONVENTION.into(),
            system_dim: s.system_dim(),
            probe_dim: s.probe_dim(),
            probe_state: vector_to_pairs(s.probe_state().amplitudes()),
            coupling: matrix_to_rows(s.coupling()),
            pointer: matrix_to_rows(s.pointer().matrix()),
        }
    }

    /// Every invariant violation, or the validated scheme.
    pub fn to_scheme(&self, tol: Tolerance) -> Result<MeasurementScheme, FormatError> {
        check_header("complex_encoding", &self.complex_encoding, COMPLEX_ENCODING)?;
        check_header("index_convention", &self.index_convention, INDEX_CONVENTION)?;
        let mut errors = Vec::new();
        let xi = state_from_pairs(&self.probe_state, tol).map_err(|e| errors.push(e)).ok();
        let pointer = observable_from_rows(&self.pointer, tol).map_err(|e| errors.push(e)).ok();
        let coupling = rows_to_matrix(&self.coupling).map_err(|e| errors.push(e)).ok();
        if let (Some(xi), Some(pointer), Some(coupling)) = (xi, pointer, coupling) {
            errors.extend(MeasurementScheme::violations(
                self.system_dim,
                self.probe_dim,
                &xi,
                &coupling,
                &pointer,
                tol,
            ));
            if errors.is_empty() {
                return MeasurementScheme::new(self.system_dim, self.probe_dim, xi, coupling, pointer, tol)
                    .map_err(Into::into);
            }
        }
        Err(FormatError::Invariant(errors))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmFile {
    pub complex_encoding: String,
    pub outcomes: Vec<f64>,
    pub effects: Vec<Rows>,
}

impl PovmFile {
    pub fn from_povm(e: &DiscretePovm) -> Self {
        Self {
            complex_encoding: COMPLEX_ENCODING.into(),
            outcomes: e.outcomes().to_vec(),
            effects: e.effects().iter().map(matrix_to_rows).collect(),
        }
    }

    pub fn to_povm(&self, tol: Tolerance) -> Result<DiscretePovm, FormatError> {
        check_header("complex_encoding", &self.complex_encoding, COMPLEX_ENCODING)?;
        let mut effects = Vec::with_capacity(self.effects.len());
        for rows in &self.effects {
            effects.push(rows_to_matrix(rows)?);
        }
        let errors = DiscretePovm::violations(&self.outcomes, &effects, tol);
        if !errors.is_empty() {
            return Err(FormatError::Invariant(errors));
        }
        Ok(DiscretePovm::new(self.outcomes.clone(), effects, tol)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableFile {
    pub complex_encoding: String,
    pub matrix: Rows,
}

impl ObservableFile {
    pub fn from_observable(a: &HermitianObservable) -> Self {
        Self {
            complex_encoding: COMPLEX_ENCODING.into(),
            matrix: matrix_to_rows(a.matrix()),
        }
    }

    pub fn to_observable(&self, tol: Tolerance) -> Result<HermitianObservable, FormatError> {
        check_header("complex_encoding", &self.complex_encoding, COMPLEX_ENCODING)?;
        Ok(observable_from_rows(&self.matrix, tol)?)
    }
}

/// A list of pure states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub complex_encoding: String,
    pub states: Vec<Vec<Pair>>,
}

impl StateFile {
    pub fn from_states(states: &[PureState]) -> Self {
        Self {
            complex_encoding: COMPLEX_ENCODING.into(),
            states: states.iter().map(|s| vector_to_pairs(s.amplitudes())).collect(),
        }
    }

    pub fn to_states(&self, tol: Tolerance) -> Result<Vec<PureState>, FormatError> {
        check_header("complex_encoding", &self.complex_encoding, COMPLEX_ENCODING)?;
        let mut errors = Vec::new();
        let mut out = Vec::with_capacity(self.states.len());
        for pairs in &self.states {
            match state_from_pairs(pairs, tol) {
                Ok(s) => out.push(s),
                Err(e) => errors.push(e),
            }
        }
        if errors.is_empty() {
            Ok(out)
        } else {
            Err(FormatError::Invariant(errors))
        }
    }
}

/// Any of the input documents, distinguished by their fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnyFile {
    Scheme(SchemeFile),
    Povm(PovmFile),
    Observable(ObservableFile),
    States(StateFile),
}

impl AnyFile {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyFile::Scheme(_) => "scheme",
            AnyFile::Povm(_) => "povm",
            AnyFile::Observable(_) => "observable",
            AnyFile::States(_) => "states",
        }
    }

    /// Re-runs the validation of whichever document this is.
    pub fn validate(&self, tol: Tolerance) -> Result<(), FormatError> {
        match self {
            AnyFile::Scheme(f) => f.to_scheme(tol).map(drop),
            AnyFile::Povm(f) => f.to_povm(tol).map(drop),
            AnyFile::Observable(f) => f.to_observable(tol).map(drop),
            AnyFile::States(f) => f.to_states(tol).map(drop),
        }
    }
}

/// Guesses the document kind from its top-level keys so that schema errors
/// point into the right structure.
pub fn load_any(text: &str) -> Result<AnyFile, FormatError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| FormatError::Parse(e.to_string()))?;
    let has = |k: &str| value.get(k).is_some();
    if has("coupling") || has("index_convention") {
        from_text(text).map(AnyFile::Scheme)
    } else if has("effects") || has("outcomes") {
        from_text(text).map(AnyFile::Povm)
    } else if has("matrix") {
        from_text(text).map(AnyFile::Observable)
    } else if has("states") {
        from_text(text).map(AnyFile::States)
    } else {
        Err(FormatError::Schema {
            path: ".".into(),
            message: "unrecognized document: expected a scheme, povm, observable or states file".into(),
        })
    }
}

/// One (state, metric) result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Record {
    pub state: usize,
    pub metric: String,
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub routes: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub residuals: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Record {
    pub fn value(state: usize, metric: &str, value: f64) -> Self {
        Self {
            state,
            metric: metric.into(),
            value: Some(value),
            routes: BTreeMap::new(),
            residuals: BTreeMap::new(),
            error: None,
        }
    }

    pub fn failure(state: usize, metric: &str, error: &Error) -> Self {
        Self {
            state,
            metric: metric.into(),
            value: None,
            routes: BTreeMap::new(),
            residuals: BTreeMap::new(),
            error: Some(error.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub version: String,
    pub command: String,
    pub tolerance: Tolerance,
    /// Input role to file path.
    pub inputs: BTreeMap<String, String>,
    pub records: Vec<Record>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariance: Option<InvarianceReport>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub summary: BTreeMap<String, f64>,
}

impl ReportFile {
    pub fn new(command: &str, tolerance: Tolerance) -> Self {
        Self {
            version: crate::VERSION.into(),
            command: command.into(),
            tolerance,
            inputs: BTreeMap::new(),
            records: Vec::new(),
            invariance: None,
            summary: BTreeMap::new(),
        }
    }

    /// Paths of numeric fields that are not finite.
    pub fn non_finite_fields(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let mut check = |path: String, x: f64| {
            if !x.is_finite() {
                bad.push(path);
            }
        };
        check("tolerance.atol".into(), self.tolerance.atol);
        check("tolerance.rtol".into(), self.tolerance.rtol);
        for (i, r) in self.records.iter().enumerate() {
            if let Some(v) = r.value {
                check(format!("records[{i}].value"), v);
            }
            for (k, v) in r.routes.iter().chain(r.residuals.iter()) {
                check(format!("records[{i}].{k}"), *v);
            }
        }
        if let Some(inv) = &self.invariance {
            for (k, v) in [
                ("first_moment_residual", inv.first_moment_residual),
                ("second_moment_residual", inv.second_moment_residual),
                ("spectral_residual", inv.spectral_residual),
                ("kraus_commutator_residual", inv.kraus_commutator_residual),
                ("threshold", inv.threshold),
            ] {
                check(format!("invariance.{k}"), v);
            }
        }
        for (k, v) in &self.summary {
            check(format!("summary.{k}"), *v);
        }
        bad
    }

    pub fn has_failures(&self) -> bool {
        self.records.iter().any(|r| r.error.is_some())
    }
}

/// `outcome,probability` rows at 17 significant digits.
pub fn distribution_csv(d: &OutcomeDistribution) -> String {
    let mut out = String::from("outcome,probability\n");
    for (x, p) in d.iter() {
        writeln!(out, "{x:.16e},{p:.16e}").expect("writing to a string");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::luders_scheme;
    use crate::linalg;
    use crate::observables::spin_observable;

    fn luders_text() -> String {
        let s = luders_scheme(&spin_observable([0.0, 0.0, 1.0]).unwrap()).unwrap();
        to_text(&SchemeFile::from_scheme(&s))
    }

    #[test]
    fn scheme_round_trip_is_byte_identical() {
        let text = luders_text();
        let file: SchemeFile = from_text(&text).unwrap();
        assert_eq!(to_text(&file), text);
        file.to_scheme(Tolerance::default()).unwrap();
    }

    #[test]
    fn random_povm_round_trip() {
        let e = crate::random::random_povm(&mut crate::random::rng(3), 3, 4).unwrap();
        let text = to_text(&PovmFile::from_povm(&e));
        let back: PovmFile = from_text(&text).unwrap();
        assert_eq!(to_text(&back), text);
        let e2 = back.to_povm(Tolerance::default()).unwrap();
        assert_eq!(e2.effects(), e.effects());
    }

    #[test]
    fn malformed_pair_reports_path() {
        let text = luders_text().replacen("[\n        1.0,\n        0.0\n      ]", "[1]", 1);
        match from_text::<SchemeFile>(&text) {
            Err(FormatError::Schema { path, .. }) => assert_eq!(path, "coupling[0][1]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn incomplete_povm_names_completeness() {
        let file = PovmFile {
            complex_encoding: COMPLEX_ENCODING.into(),
            outcomes: vec![0.0, 1.0],
            effects: vec![
                matrix_to_rows(&linalg::diagonal(&[0.99, 0.0])),
                matrix_to_rows(&linalg::diagonal(&[0.0, 0.99])),
            ],
        };
        match file.to_povm(Tolerance::default()) {
            Err(FormatError::Invariant(errors)) => {
                assert!(errors.iter().any(|e| matches!(e, Error::NotComplete { residual } if (residual - 0.01).abs() < 1e-12)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_index_convention_is_schema_error() {
        let text = luders_text().replace("system-major", "probe-major");
        let file: SchemeFile = from_text(&text).unwrap();
        assert!(matches!(file.to_scheme(Tolerance::default()), Err(FormatError::Schema { .. })));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = "{\"complex_encoding\": \"[re, im]\", \"matrix\": [[[1, 0]]], \"extra\": 1}";
        assert!(matches!(from_text::<ObservableFile>(text), Err(FormatError::Schema { .. })));
    }

    #[test]
    fn load_any_dispatches() {
        assert_eq!(load_any(&luders_text()).unwrap().kind(), "scheme");
        let states = to_text(&StateFile::from_states(&[PureState::basis(2, 1).unwrap()]));
        assert_eq!(load_any(&states).unwrap().kind(), "states");
        assert!(matches!(load_any("{"), Err(FormatError::Parse(_))));
    }

    #[test]
    fn csv_has_full_precision() {
        let d = OutcomeDistribution::new(vec![-0.5, 0.5], vec![0.1, 0.9], Tolerance::default()).unwrap();
        let csv = distribution_csv(&d);
        let line = csv.lines().nth(1).unwrap();
        let p: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(p, 0.1);
        assert_eq!(line, "-5.0000000000000000e-1,1.0000000000000001e-1");
    }

    #[test]
    fn report_finiteness() {
        let mut r = ReportFile::new("noise", Tolerance::default());
        r.records.push(Record::value(0, "eps_n", 0.5));
        assert!(r.non_finite_fields().is_empty());
        r.records[0].value = Some(f64::NAN);
        assert_eq!(r.non_finite_fields(), vec!["records[0].value".to_string()]);
    }
}
