//! Python bindings for the divergence library.
//!
//! Exposes the main types and operations as a `divcert_py` extension
//! module: generators by name, the four pair models, partitions by cut
//! points, reference divergences, partition bounds, the brute-force
//! supremum, ε-tight certificates and infinite-divergence evidence.
//! Domain errors surface as `ValueError`, accuracy/guard failures as
//! `RuntimeError`.

use divcert::divergence as div_ops;
use divcert::divergence::DivergenceValue;
use divcert::generator::Generator;
use divcert::gyp;
use divcert::interval::RatioInterval;
use divcert::io::PairSpec;
use divcert::measure::{
    CountablePair, DiscretePair, GaussianPair, GridPair, MeasurePair, DEFAULT_COUNTABLE_CAP,
};
use divcert::partition::{self, Partition};
use divcert::{Error, ErrorClass};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py_err(e: Error) -> PyErr {
    match e.exit_class() {
        ErrorClass::Domain => PyValueError::new_err(e.to_string()),
        ErrorClass::Accuracy => PyRuntimeError::new_err(e.to_string()),
    }
}

fn interval(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> PyResult<RatioInterval> {
    RatioInterval::new(lo, lo_closed, hi, hi_closed).map_err(to_py_err)
}

/// A convex divergence generator.
#[pyclass(name = "Generator", frozen)]
struct PyGenerator {
    inner: Generator,
}

#[pymethods]
impl PyGenerator {
    /// Looks up a built-in by name: kl, tv, chi2, hellinger,
    /// tsallis:<alpha>.
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        Ok(PyGenerator {
            inner: Generator::by_name(name).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn at_zero(&self) -> f64 {
        self.inner.at_zero().as_f64()
    }

    #[getter]
    fn slope_at_infinity(&self) -> f64 {
        self.inner.slope_at_infinity().as_f64()
    }

    #[getter]
    fn subgradient_at_one(&self) -> (f64, f64) {
        self.inner.subgradient_at_one()
    }

    fn eval(&self, u: f64) -> PyResult<f64> {
        self.inner.eval(u).map_err(to_py_err)
    }

    fn subgradient(&self, u: f64) -> PyResult<(f64, f64)> {
        self.inner.subgradient(u).map_err(to_py_err)
    }

    /// `(f(0), f'(inf))` after the numeric cross-check.
    fn boundary_limits(&self) -> PyResult<(f64, f64)> {
        let (z, s) = self.inner.boundary_limits().map_err(to_py_err)?;
        Ok((z.as_f64(), s.as_f64()))
    }

    /// Support-line normalization: `(normalized_generator, slope)`.
    fn normalize(&self) -> (PyGenerator, f64) {
        let ng = self.inner.normalize();
        (
            PyGenerator {
                inner: ng.tilde().clone(),
            },
            ng.slope(),
        )
    }

    /// `b_n = inf{u > 1 : normalized f(u) >= n}` as `(value, capped)`.
    fn level_threshold(&self, n: u64) -> PyResult<(f64, bool)> {
        let t = self.inner.normalize().level_threshold(n).map_err(to_py_err)?;
        Ok((t.value.as_f64(), t.capped))
    }

    fn __repr__(&self) -> String {
        format!("Generator({:?})", self.inner.name())
    }
}

/// A dominated measure pair.
#[pyclass(name = "MeasurePair", frozen)]
struct PyMeasurePair {
    inner: MeasurePair,
}

#[pymethods]
impl PyMeasurePair {
    /// Discrete pair from probability vectors.
    #[staticmethod]
    fn discrete(p: Vec<f64>, r: Vec<f64>) -> PyResult<Self> {
        Ok(PyMeasurePair {
            inner: DiscretePair::new(p, r).map_err(to_py_err)?.into(),
        })
    }

    /// Gaussian pair `N(mean1, sd1)` vs `N(mean2, sd2)`.
    #[staticmethod]
    #[pyo3(signature = (mean1, sd1, mean2, sd2, quad_tol=None))]
    fn gaussian(
        mean1: f64,
        sd1: f64,
        mean2: f64,
        sd2: f64,
        quad_tol: Option<f64>,
    ) -> PyResult<Self> {
        let pair = match quad_tol {
            Some(tol) => GaussianPair::with_quad_tol(mean1, sd1, mean2, sd2, tol),
            None => GaussianPair::new(mean1, sd1, mean2, sd2),
        }
        .map_err(to_py_err)?;
        Ok(PyMeasurePair { inner: pair.into() })
    }

    /// Piecewise-constant pair on a grid of cell edges.
    #[staticmethod]
    fn grid(edges: Vec<f64>, p_mass: Vec<f64>, r_mass: Vec<f64>) -> PyResult<Self> {
        Ok(PyMeasurePair {
            inner: GridPair::new(edges, p_mass, r_mass).map_err(to_py_err)?.into(),
        })
    }

    /// Built-in countable pair by registry name.
    #[staticmethod]
    #[pyo3(signature = (name, cap=None))]
    fn countable(name: &str, cap: Option<u64>) -> PyResult<Self> {
        Ok(PyMeasurePair {
            inner: CountablePair::builtin(name, cap.unwrap_or(DEFAULT_COUNTABLE_CAP))
                .map_err(to_py_err)?
                .into(),
        })
    }

    /// Parses the JSON pair schema used by the CLI.
    #[staticmethod]
    #[pyo3(signature = (json, quad_tol=None))]
    fn from_json(json: &str, quad_tol: Option<f64>) -> PyResult<Self> {
        let spec: PairSpec = divcert::io::parse_pair(json).map_err(to_py_err)?;
        Ok(PyMeasurePair {
            inner: spec.build(quad_tol).map_err(to_py_err)?,
        })
    }

    /// `(P, R)` masses of the ratio level set `{rho in [lo, hi]}`.
    #[pyo3(signature = (lo, hi, lo_closed=true, hi_closed=true))]
    fn ratio_interval_masses(
        &self,
        lo: f64,
        hi: f64,
        lo_closed: bool,
        hi_closed: bool,
    ) -> PyResult<(f64, f64)> {
        Ok(self
            .inner
            .ratio_interval_masses(&interval(lo, hi, lo_closed, hi_closed)?))
    }

    /// Restricted integral of `f(rho) r dmu` over a ratio interval.
    #[pyo3(signature = (generator, lo, hi, lo_closed=true, hi_closed=true))]
    fn restricted_divergence(
        &self,
        generator: &PyGenerator,
        lo: f64,
        hi: f64,
        lo_closed: bool,
        hi_closed: bool,
    ) -> PyResult<PyDivergenceValue> {
        let v = self
            .inner
            .restricted_divergence(&generator.inner, &interval(lo, hi, lo_closed, hi_closed)?)
            .map_err(to_py_err)?;
        Ok(PyDivergenceValue { inner: v })
    }

    /// Essential range of the likelihood ratio.
    fn ratio_range(&self) -> (f64, f64) {
        self.inner.ratio_range()
    }

    fn mass_tolerance(&self) -> f64 {
        self.inner.mass_tolerance()
    }

    fn __repr__(&self) -> String {
        let model = match &self.inner {
            MeasurePair::Discrete(_) => "discrete",
            MeasurePair::Grid(_) => "grid",
            MeasurePair::Gaussian(_) => "gaussian",
            MeasurePair::Countable(_) => "countable",
        };
        format!("MeasurePair({model})")
    }
}

/// A computed divergence with its accuracy disclosure.
#[pyclass(name = "DivergenceValue", frozen)]
struct PyDivergenceValue {
    inner: DivergenceValue,
}

#[pymethods]
impl PyDivergenceValue {
    #[getter]
    fn value(&self) -> f64 {
        self.inner.value.as_f64()
    }

    #[getter]
    fn error_bound(&self) -> f64 {
        self.inner.error_bound
    }

    #[getter]
    fn finite(&self) -> bool {
        self.inner.finite
    }

    fn __float__(&self) -> f64 {
        self.inner.value.as_f64()
    }

    fn __repr__(&self) -> String {
        format!(
            "DivergenceValue(value={}, error_bound={}, finite={})",
            self.inner.value, self.inner.error_bound, self.inner.finite
        )
    }
}

/// A finite partition of the ratio axis.
#[pyclass(name = "Partition", frozen)]
struct PyPartition {
    inner: Partition,
}

#[pymethods]
impl PyPartition {
    /// Builds `[0, c1), [c1, c2), ..., [cm, inf]` from interior cuts.
    #[new]
    #[pyo3(signature = (cuts=vec![]))]
    fn new(cuts: Vec<f64>) -> PyResult<Self> {
        Ok(PyPartition {
            inner: Partition::from_cuts(&cuts).map_err(to_py_err)?,
        })
    }

    /// Cells as `(lo, hi, lo_closed, hi_closed)` tuples.
    fn cells(&self) -> Vec<(f64, f64, bool, bool)> {
        self.inner
            .cells()
            .iter()
            .map(|c| (c.lo(), c.hi(), c.lo_closed(), c.hi_closed()))
            .collect()
    }

    fn refine(&self, cell_index: usize, split_point: f64) -> PyResult<Self> {
        Ok(PyPartition {
            inner: self.inner.refine(cell_index, split_point).map_err(to_py_err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        match self.inner.as_cuts() {
            Some(cuts) => format!("Partition(cuts={cuts:?})"),
            None => format!("Partition(cells={})", self.inner.len()),
        }
    }
}

/// An ε-tight lower-bound certificate.
#[pyclass(name = "ApproxResult", frozen)]
struct PyApproxResult {
    inner: gyp::ApproxResult,
}

#[pymethods]
impl PyApproxResult {
    #[getter]
    fn lower_bound(&self) -> f64 {
        self.inner.lower_bound
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }

    #[getter]
    fn h0(&self) -> f64 {
        self.inner.h0
    }

    #[getter]
    fn k0(&self) -> f64 {
        self.inner.k0
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    #[getter]
    fn tail_gap_low(&self) -> f64 {
        self.inner.tail_gap_low
    }

    #[getter]
    fn tail_gap_high(&self) -> f64 {
        self.inner.tail_gap_high
    }

    #[getter]
    fn slope(&self) -> f64 {
        self.inner.slope
    }

    #[getter]
    fn m_cells(&self) -> usize {
        self.inner.interior_cells()
    }

    #[getter]
    fn reference(&self) -> PyDivergenceValue {
        PyDivergenceValue {
            inner: self.inner.reference,
        }
    }

    fn gap(&self) -> f64 {
        self.inner.gap()
    }

    fn partition(&self) -> PyPartition {
        PyPartition {
            inner: self.inner.partition.clone(),
        }
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "ApproxResult(lower_bound={}, epsilon={}, m_cells={})",
            self.inner.lower_bound,
            self.inner.epsilon,
            self.inner.interior_cells()
        )
    }
}

/// Partial-sum evidence that the partition supremum exceeds a target.
#[pyclass(name = "InfinityEvidence", frozen)]
struct PyInfinityEvidence {
    inner: gyp::InfinityEvidence,
}

#[pymethods]
impl PyInfinityEvidence {
    #[getter]
    fn exceeded(&self) -> bool {
        self.inner.exceeded
    }

    #[getter]
    fn target(&self) -> f64 {
        self.inner.target
    }

    #[getter]
    fn n_used(&self) -> u64 {
        self.inner.n_used
    }

    #[getter]
    fn partial_sums(&self) -> Vec<f64> {
        self.inner.partial_sums.iter().map(|s| s.as_f64()).collect()
    }

    /// Cells as `(level, lo, hi, p_mass, r_mass, term)` tuples.
    #[getter]
    fn cells(&self) -> Vec<(f64, f64, f64, f64, f64, f64)> {
        self.inner
            .cells
            .iter()
            .map(|c| {
                (
                    c.level,
                    c.cell.lo(),
                    c.cell.hi(),
                    c.p_mass,
                    c.r_mass,
                    c.term.as_f64(),
                )
            })
            .collect()
    }

    fn total(&self) -> f64 {
        self.inner.total().as_f64()
    }

    fn to_partition(&self) -> PyResult<PyPartition> {
        Ok(PyPartition {
            inner: self.inner.to_partition().map_err(to_py_err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "InfinityEvidence(exceeded={}, n_used={}, total={})",
            self.inner.exceeded,
            self.inner.n_used,
            self.inner.total()
        )
    }
}

#[pyfunction]
fn divergence(generator: &PyGenerator, pair: &PyMeasurePair) -> PyResult<PyDivergenceValue> {
    Ok(PyDivergenceValue {
        inner: div_ops::divergence(&generator.inner, &pair.inner).map_err(to_py_err)?,
    })
}

#[pyfunction]
fn tsallis(alpha: f64, pair: &PyMeasurePair) -> PyResult<PyDivergenceValue> {
    Ok(PyDivergenceValue {
        inner: div_ops::tsallis(alpha, &pair.inner).map_err(to_py_err)?,
    })
}

#[pyfunction]
fn renyi(alpha: f64, pair: &PyMeasurePair) -> PyResult<PyDivergenceValue> {
    Ok(PyDivergenceValue {
        inner: div_ops::renyi(alpha, &pair.inner).map_err(to_py_err)?,
    })
}

#[pyfunction]
fn partition_divergence(
    generator: &PyGenerator,
    pair: &PyMeasurePair,
    part: &PyPartition,
) -> PyResult<PyDivergenceValue> {
    Ok(PyDivergenceValue {
        inner: partition::partition_divergence(&generator.inner, &pair.inner, &part.inner)
            .map_err(to_py_err)?,
    })
}

#[pyfunction]
fn renyi_partition_bound(
    alpha: f64,
    pair: &PyMeasurePair,
    part: &PyPartition,
) -> PyResult<PyDivergenceValue> {
    Ok(PyDivergenceValue {
        inner: partition::renyi_partition_bound(alpha, &pair.inner, &part.inner)
            .map_err(to_py_err)?,
    })
}

/// Coarsens a pair through a partition into the discrete pair of cell
/// masses.
#[pyfunction]
fn coarsen(pair: &PyMeasurePair, part: &PyPartition) -> PyResult<PyMeasurePair> {
    Ok(PyMeasurePair {
        inner: partition::coarsen(&pair.inner, &part.inner)
            .map_err(to_py_err)?
            .into(),
    })
}

/// Brute-force partition supremum over a discrete pair's support:
/// `(value, argmax_blocks, partitions_checked)`.
#[pyfunction]
fn brute_force_supremum(
    generator: &PyGenerator,
    pair: &PyMeasurePair,
) -> PyResult<(PyDivergenceValue, Vec<Vec<usize>>, u64)> {
    let MeasurePair::Discrete(discrete) = &pair.inner else {
        return Err(PyValueError::new_err(
            "brute-force search needs a discrete pair",
        ));
    };
    let out = partition::brute_force_search(&generator.inner, discrete).map_err(to_py_err)?;
    Ok((
        PyDivergenceValue { inner: out.value },
        out.best_blocks,
        out.partitions_checked,
    ))
}

#[pyfunction]
fn gyp_approximate(
    generator: &PyGenerator,
    pair: &PyMeasurePair,
    epsilon: f64,
) -> PyResult<PyApproxResult> {
    Ok(PyApproxResult {
        inner: gyp::gyp_approximate(&generator.inner, &pair.inner, epsilon).map_err(to_py_err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (generator, pair, target, n_max=10_000))]
fn detect_infinite(
    generator: &PyGenerator,
    pair: &PyMeasurePair,
    target: f64,
    n_max: u64,
) -> PyResult<PyInfinityEvidence> {
    Ok(PyInfinityEvidence {
        inner: gyp::detect_infinite(&generator.inner, &pair.inner, target, n_max)
            .map_err(to_py_err)?,
    })
}

/// Certificate sweep: list of `(epsilon, m_cells, lower_bound, gap)` rows.
#[pyfunction]
fn convergence_sweep(
    generator: &PyGenerator,
    pair: &PyMeasurePair,
    epsilons: Vec<f64>,
) -> PyResult<Vec<(f64, usize, f64, f64)>> {
    let rows =
        gyp::convergence_sweep(&generator.inner, &pair.inner, &epsilons).map_err(to_py_err)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.epsilon, r.m_cells, r.lower_bound, r.gap))
        .collect())
}

#[pymodule]
fn divcert_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGenerator>()?;
    m.add_class::<PyMeasurePair>()?;
    m.add_class::<PyDivergenceValue>()?;
    m.add_class::<PyPartition>()?;
    m.add_class::<PyApproxResult>()?;
    m.add_class::<PyInfinityEvidence>()?;
    m.add_function(wrap_pyfunction!(divergence, m)?)?;
    m.add_function(wrap_pyfunction!(tsallis, m)?)?;
    m.add_function(wrap_pyfunction!(renyi, m)?)?;
    m.add_function(wrap_pyfunction!(partition_divergence, m)?)?;
    m.add_function(wrap_pyfunction!(renyi_partition_bound, m)?)?;
    m.add_function(wrap_pyfunction!(coarsen, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_supremum, m)?)?;
    m.add_function(wrap_pyfunction!(gyp_approximate, m)?)?;
    m.add_function(wrap_pyfunction!(detect_infinite, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_sweep, m)?)?;
    Ok(())
}
