//! Python bindings. Integers cross the boundary as Python `int`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_bigint::BigUint;
use pyo3::exceptions::{PyIOError, PyKeyError, PyOverflowError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hnd_core::exact_num::{to_digits_rev, DigitSeq};
use hnd_core::factory::{self, DatasetConfig};
use hnd_core::features::{self, NumericPath};
use hnd_core::float_wall;
use hnd_core::hnd::{standard_registry, Base};
use hnd_core::triple_gen::{self, GenParams};
use hnd_core::{Error, ExactInt, SampleRng};

fn py_err(e: Error) -> PyErr {
    match &e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::UnknownAttack(_) => PyKeyError::new_err(e.to_string()),
        Error::Overflow => PyOverflowError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn exact(v: BigUint) -> ExactInt {
    ExactInt::from(v)
}

fn py_int(v: &ExactInt) -> BigUint {
    v.as_biguint().clone()
}

#[pyclass(name = "Triple", module = "hnd", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyTriple(triple_gen::Triple);

#[pymethods]
impl PyTriple {
    #[new]
    fn new(a: BigUint, b: BigUint, c: BigUint) -> PyResult<Self> {
        triple_gen::Triple::new(exact(a), exact(b), exact(c))
            .map(PyTriple)
            .map_err(py_err)
    }

    #[getter]
    fn a(&self) -> BigUint {
        py_int(self.0.a())
    }

    #[getter]
    fn b(&self) -> BigUint {
        py_int(self.0.b())
    }

    #[getter]
    fn c(&self) -> BigUint {
        py_int(self.0.c())
    }

    /// `c - b`, or None when `c < b`.
    #[getter]
    fn gap(&self) -> Option<BigUint> {
        self.0.gap().map(|g| py_int(&g))
    }

    #[getter]
    fn label(&self) -> &'static str {
        triple_gen::classify(&self.0).as_str()
    }

    fn verify(&self) -> bool {
        triple_gen::verify_equation(&self.0)
    }

    fn features(&self, py: Python<'_>, path: &str) -> PyResult<Py<PyDict>> {
        feature_dict(py, &self.0, path)
    }

    fn as_tuple(&self) -> (BigUint, BigUint, BigUint) {
        (self.a(), self.b(), self.c())
    }

    fn __repr__(&self) -> String {
        format!("Triple({}, {}, {})", self.0.a(), self.0.b(), self.0.c())
    }
}

#[pyfunction]
fn stifel(n: BigUint) -> PyResult<PyTriple> {
    triple_gen::stifel(&exact(n)).map(PyTriple).map_err(py_err)
}

#[pyfunction]
fn euclid(m: BigUint, k: BigUint) -> PyResult<PyTriple> {
    triple_gen::euclid(&exact(m), &exact(k))
        .map(PyTriple)
        .map_err(py_err)
}

#[pyfunction]
fn plato(n: BigUint) -> PyResult<PyTriple> {
    triple_gen::plato(&exact(n)).map(PyTriple).map_err(py_err)
}

#[pyfunction]
fn fibonacci_triple(i: u64) -> PyResult<PyTriple> {
    triple_gen::fibonacci_triple(i)
        .map(PyTriple)
        .map_err(py_err)
}

#[pyfunction]
fn classify(t: &PyTriple) -> &'static str {
    triple_gen::classify(&t.0).as_str()
}

#[pyfunction]
fn digits_rev(x: &str) -> PyResult<Vec<u32>> {
    to_digits_rev(x)
        .map(|d| d.digits().iter().map(|&v| u32::from(v)).collect())
        .map_err(py_err)
}

#[pyfunction]
fn token_ids(x: BigUint, max_len: usize) -> PyResult<Vec<u32>> {
    to_digits_rev(&x.to_string())
        .and_then(|d| d.token_ids(max_len))
        .map_err(py_err)
}

#[pyfunction]
fn from_token_ids(ids: Vec<u32>) -> PyResult<BigUint> {
    DigitSeq::from_token_ids(&ids)
        .map(|d| d.to_exact().into_biguint())
        .map_err(py_err)
}

#[pyfunction]
fn ulp_gap(x: BigUint) -> BigUint {
    float_wall::ulp_gap(&exact(x)).into_biguint()
}

#[pyfunction]
fn round_to_double(x: BigUint) -> PyResult<BigUint> {
    float_wall::round_to_double(&exact(x))
        .map(ExactInt::into_biguint)
        .map_err(py_err)
}

#[pyfunction]
fn collides(x: BigUint, y: BigUint) -> bool {
    float_wall::collides(&exact(x), &exact(y))
}

/// `(decimal_exp, n, b_digits, ulp_gap, collision)`
type WallTuple = (u32, BigUint, usize, BigUint, bool);

#[pyfunction]
fn wall_scan(min_exp: u32, max_exp: u32) -> PyResult<Vec<WallTuple>> {
    let rows = float_wall::wall_scan(min_exp, max_exp).map_err(py_err)?;
    Ok(rows
        .into_iter()
        .map(|r| {
            (
                r.decimal_exp,
                r.n.into_biguint(),
                r.b_digits,
                r.report.ulp_gap.into_biguint(),
                r.hypotenuse_collides,
            )
        })
        .collect())
}

#[pyfunction]
fn attack_codes() -> Vec<String> {
    standard_registry()
        .codes()
        .into_iter()
        .map(String::from)
        .collect()
}

/// Applies `code` to the Stifel triple at `n` with the RNG keyed on
/// `(seed, shard, index)`. Returns `(triple, label, seed_path)`.
#[pyfunction]
#[pyo3(signature = (code, n, seed, shard = 0, index = 0))]
fn apply_attack(
    code: &str,
    n: BigUint,
    seed: u64,
    shard: u64,
    index: u64,
) -> PyResult<(PyTriple, &'static str, String)> {
    let base = Base::stifel(&exact(n)).map_err(py_err)?;
    let mut rng = SampleRng::keyed(seed, shard, index);
    let path = format!("{seed}/{shard}/{index}");
    let s = standard_registry()
        .apply(code, &base, &mut rng, &path)
        .map_err(py_err)?;
    Ok((PyTriple(s.triple), s.label.as_str(), s.seed_path))
}

fn feature_dict(py: Python<'_>, t: &triple_gen::Triple, path: &str) -> PyResult<Py<PyDict>> {
    let path: NumericPath = path.parse().map_err(py_err)?;
    let fv = features::extract(t, path);
    let d = PyDict::new(py);
    // exact scalars stay decimal text so no precision is lost in transit
    d.set_item("f_gap", fv.f_gap.to_string())?;
    d.set_item("f_ratio", fv.f_ratio.to_string())?;
    d.set_item("f_res", fv.f_res)?;
    d.set_item("path", path.as_str())?;
    Ok(d.unbind())
}

#[pyfunction]
fn extract_features(py: Python<'_>, t: &PyTriple, path: &str) -> PyResult<Py<PyDict>> {
    feature_dict(py, &t.0, path)
}

#[pyfunction]
fn record_line(t: &PyTriple, attack: Option<String>, n: Option<BigUint>) -> String {
    let origin = n.map(|n| GenParams::Stifel { n: exact(n) });
    let s = hnd_core::LabeledSample::new(t.0.clone(), attack, origin, String::new());
    factory::record_line(&s)
}

/// `(triple, label, attack, n)` from one record line.
#[pyfunction]
fn parse_record(line: &str) -> PyResult<(PyTriple, String, Option<String>, Option<BigUint>)> {
    let r = factory::parse_record(line.trim_end_matches('\n')).map_err(PyValueError::new_err)?;
    Ok((
        PyTriple(r.triple),
        r.label.as_str().to_string(),
        r.attack,
        r.n.map(ExactInt::into_biguint),
    ))
}

/// Writes a sharded dataset and returns the number of records.
#[pyfunction]
#[pyo3(signature = (start, end, out, shard_size = factory::DEFAULT_SHARD_SIZE, negative_ratio = 0.0, attack_mix = None, seed = 0, workers = 1))]
#[allow(clippy::too_many_arguments)]
fn generate(
    py: Python<'_>,
    start: BigUint,
    end: BigUint,
    out: PathBuf,
    shard_size: u64,
    negative_ratio: f64,
    attack_mix: Option<BTreeMap<String, f64>>,
    seed: u64,
    workers: usize,
) -> PyResult<u64> {
    let mut config = DatasetConfig::new(exact(start), exact(end));
    config.output_dir = out;
    config.shard_size = shard_size;
    config.negative_ratio = negative_ratio;
    config.attack_mix = attack_mix.unwrap_or_default();
    config.seed = seed;
    py.detach(|| factory::generate(&config, workers))
        .map(|index| index.total_records)
        .map_err(py_err)
}

/// True iff every shard in `dir` matches its manifest and labels.
#[pyfunction]
fn verify_dataset(py: Python<'_>, dir: PathBuf) -> PyResult<bool> {
    py.detach(|| factory::verify_dataset(&dir))
        .map(|v| v.is_ok())
        .map_err(py_err)
}

#[pyfunction]
fn verify_shard(shard: PathBuf, manifest: PathBuf) -> PyResult<bool> {
    let m = factory::read_manifest(&manifest).map_err(py_err)?;
    factory::verify_shard(&shard, &m)
        .map(|v| v.is_ok())
        .map_err(py_err)
}

#[pymodule]
fn hnd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTriple>()?;
    m.add("EPSILON", features::EPSILON)?;
    m.add("FEATURE_HEADER", features::FEATURE_HEADER)?;
    m.add_function(wrap_pyfunction!(stifel, m)?)?;
    m.add_function(wrap_pyfunction!(euclid, m)?)?;
    m.add_function(wrap_pyfunction!(plato, m)?)?;
    m.add_function(wrap_pyfunction!(fibonacci_triple, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(digits_rev, m)?)?;
    m.add_function(wrap_pyfunction!(token_ids, m)?)?;
    m.add_function(wrap_pyfunction!(from_token_ids, m)?)?;
    m.add_function(wrap_pyfunction!(ulp_gap, m)?)?;
    m.add_function(wrap_pyfunction!(round_to_double, m)?)?;
    m.add_function(wrap_pyfunction!(collides, m)?)?;
    m.add_function(wrap_pyfunction!(wall_scan, m)?)?;
    m.add_function(wrap_pyfunction!(attack_codes, m)?)?;
    m.add_function(wrap_pyfunction!(apply_attack, m)?)?;
    m.add_function(wrap_pyfunction!(extract_features, m)?)?;
    m.add_function(wrap_pyfunction!(record_line, m)?)?;
    m.add_function(wrap_pyfunction!(parse_record, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(verify_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(verify_shard, m)?)?;
    Ok(())
}
