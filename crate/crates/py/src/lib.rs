use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use heatgrid::eval::{self, EvalConfig};
use heatgrid::harness::{self, ExperimentConfig};
use heatgrid::{catalog, markov, seed_stream, Algorithm, EnvState, Error, Hyperparams, Position, SimRng};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::NotConverged(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn policy_from(spec: &heatgrid::GridSpec, actions: Vec<usize>) -> PyResult<heatgrid::Policy> {
    let n_actions = spec.n_actions();
    if actions.len() != spec.n_cells() || actions.iter().any(|&a| a >= n_actions) {
        return Err(PyValueError::new_err(format!("policy must list {} actions in 0..{n_actions}", spec.n_cells())));
    }
    Ok(heatgrid::Policy { n_actions, actions })
}

/// World description: grid or interval, temperatures, drift, goal and rewards.
#[pyclass(name = "GridSpec", frozen)]
struct PyGridSpec {
    inner: heatgrid::GridSpec,
}

#[pymethods]
impl PyGridSpec {
    /// Resolve a catalog identifier such as `grid2d_L(3)` or `interval41_drift(3,0.3)`.
    #[staticmethod]
    fn catalog(name: &str) -> PyResult<Self> {
        Ok(PyGridSpec { inner: catalog::lookup(name).map_err(py_err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyGridSpec { inner: heatgrid::GridSpec::from_json(text).map_err(py_err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn dims(&self) -> u8 {
        self.inner.dims
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn n_states(&self) -> usize {
        self.inner.n_cells()
    }

    #[getter]
    fn n_actions(&self) -> usize {
        self.inner.n_actions()
    }

    #[getter]
    fn temperature(&self) -> Vec<u32> {
        self.inner.temperature.clone()
    }

    fn __repr__(&self) -> String {
        format!("GridSpec(dims={}, width={}, height={})", self.inner.dims, self.inner.width(), self.inner.height())
    }
}

/// Stateful simulator with its own random stream.
#[pyclass(name = "Env", unsendable)]
struct PyEnv {
    env: heatgrid::Env,
    state: EnvState,
    rng: SimRng,
}

#[pymethods]
impl PyEnv {
    #[new]
    #[pyo3(signature = (spec, seed=0))]
    fn new(spec: &PyGridSpec, seed: u64) -> PyResult<Self> {
        let env = heatgrid::Env::new(spec.inner.clone()).map_err(py_err)?;
        let state = env.reset();
        Ok(PyEnv { env, state, rng: seed_stream(seed, 0, "python-env") })
    }

    /// Returns the start state index.
    fn reset(&mut self) -> usize {
        self.state = self.env.reset();
        self.env.state_index(self.state.cell().expect("start is a cell"))
    }

    /// Applies one frame. Returns `(next_state or None, reward, done)`.
    fn step(&mut self, action: usize) -> PyResult<(Option<usize>, i32, bool)> {
        if action >= self.env.n_actions() {
            return Err(PyValueError::new_err(format!("action {action} out of range")));
        }
        if self.state.is_absorbed() {
            return Err(PyRuntimeError::new_err("episode is over; call reset()"));
        }
        let out = self.env.step(&self.state, action, &mut self.rng);
        self.state = out.next;
        let next = match out.next.position {
            Position::Cell(c) => Some(self.env.state_index(c)),
            Position::Absorbed => None,
        };
        Ok((next, out.reward, out.done))
    }

    #[getter]
    fn frame_count(&self) -> u64 {
        self.state.frame_count
    }
}

/// Learned action values of one agent.
#[pyclass(name = "QTable", frozen)]
struct PyQTable {
    inner: heatgrid::QTable,
}

#[pymethods]
impl PyQTable {
    fn get(&self, state: usize, action: usize) -> PyResult<f64> {
        if state >= self.inner.n_states() || action >= self.inner.n_actions() {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.inner.get(state, action))
    }

    fn greedy_policy(&self) -> Vec<usize> {
        (0..self.inner.n_states()).map(|s| self.inner.argmax(s)).collect()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.n_states(), self.inner.n_actions())
    }
}

/// Trains one agent and returns its decision table.
#[pyfunction]
#[pyo3(signature = (spec, algorithm="q", frames=50_000, alpha=0.1, epsilon=0.1, gamma=0.9, seed=0, agent=0))]
#[allow(clippy::too_many_arguments)]
fn train(spec: &PyGridSpec, algorithm: &str, frames: u64, alpha: f64, epsilon: f64, gamma: f64, seed: u64, agent: u64) -> PyResult<PyQTable> {
    let algorithm: Algorithm = algorithm.parse().map_err(py_err)?;
    let hyper = Hyperparams { alpha, epsilon, gamma, ..Hyperparams::default() };
    hyper.validate().map_err(py_err)?;
    if frames == 0 {
        return Err(PyValueError::new_err("frames must be positive"));
    }
    let env = heatgrid::Env::new(spec.inner.clone()).map_err(py_err)?;
    let out = heatgrid::td::train(&env, algorithm, &hyper, frames, &[], seed_stream(seed, agent, "train"));
    Ok(PyQTable { inner: out.learner.decision_table() })
}

/// Greedy rollouts of a population of policies; returns summary statistics.
#[pyfunction]
#[pyo3(signature = (spec, policies, cutoff=500, rollouts_per_agent=1, seed=0))]
fn evaluate<'py>(
    py: Python<'py>,
    spec: &PyGridSpec,
    policies: Vec<Vec<usize>>,
    cutoff: u64,
    rollouts_per_agent: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let env = heatgrid::Env::new(spec.inner.clone()).map_err(py_err)?;
    let policies = policies.into_iter().map(|p| policy_from(&spec.inner, p)).collect::<PyResult<Vec<_>>>()?;
    let stats = eval::evaluate_population(&policies, &env, &EvalConfig { cutoff, rollouts_per_agent }, seed);
    let d = PyDict::new(py);
    d.set_item("mfpt", stats.mfpt)?;
    d.set_item("std", stats.std)?;
    d.set_item("failed_fraction", stats.failed_fraction())?;
    d.set_item("heated_fraction", stats.heated_fraction())?;
    d.set_item("rollouts", stats.total())?;
    Ok(d)
}

/// 1D policy going right from `k` cells left of the center.
#[pyfunction]
fn threshold_policy(spec: &PyGridSpec, k: i32) -> PyResult<Vec<usize>> {
    if spec.inner.dims != 1 {
        return Err(PyValueError::new_err("threshold policies are defined on 1D intervals"));
    }
    Ok(eval::threshold_policy_1d(k, &spec.inner).actions)
}

/// Exact `(mean, std)` of the first-passage time from the start cell.
#[pyfunction]
fn exact_fpt(spec: &PyGridSpec, policy: Vec<usize>) -> PyResult<(f64, f64)> {
    let policy = policy_from(&spec.inner, policy)?;
    let chain = markov::build_transition_matrix(&spec.inner, &policy).map_err(py_err)?;
    let (mean, std) = markov::fundamental_fpt_moments(&chain).map_err(py_err)?;
    let s0 = spec.inner.center() as usize;
    Ok((mean[s0], std[s0]))
}

/// Monte Carlo `(mean, std)` of the first-passage time from the start cell.
#[pyfunction]
#[pyo3(signature = (spec, policy, n_runs=100_000, seed=0))]
fn mc_fpt(spec: &PyGridSpec, policy: Vec<usize>, n_runs: u64, seed: u64) -> PyResult<(f64, f64)> {
    let policy = policy_from(&spec.inner, policy)?;
    let env = heatgrid::Env::new(spec.inner.clone()).map_err(py_err)?;
    let est = eval::mc_policy_mfpt(&policy, &env, n_runs, seed);
    Ok((est.mfpt, est.std))
}

#[pyfunction]
fn scenarios() -> Vec<&'static str> {
    harness::SCENARIOS.to_vec()
}

/// JSON of a named scenario preset.
#[pyfunction]
fn scenario_config(name: &str) -> PyResult<String> {
    Ok(harness::scenario(name).map_err(py_err)?.to_json())
}

/// Runs an experiment config (JSON) in memory and returns `results.csv` text.
#[pyfunction]
fn run_config(py: Python<'_>, config_json: &str) -> PyResult<String> {
    let config = ExperimentConfig::from_json(config_json).map_err(py_err)?;
    let out = py.detach(|| harness::execute(&config)).map_err(py_err)?;
    Ok(out.results.to_csv())
}

#[pymodule]
fn heatgrid_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGridSpec>()?;
    m.add_class::<PyEnv>()?;
    m.add_class::<PyQTable>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_policy, m)?)?;
    m.add_function(wrap_pyfunction!(exact_fpt, m)?)?;
    m.add_function(wrap_pyfunction!(mc_fpt, m)?)?;
    m.add_function(wrap_pyfunction!(scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(scenario_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
