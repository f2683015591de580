//! Python bindings. Structured values (actions, outcomes, reports) cross the
//! boundary as JSON text in the same encoding the CLI and trace files use;
//! amounts are returned as Python ints.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use model::properties::{self, ExploreConfig, PropertyId};
use model::scenarios::{self, ScenarioKind, ScenarioSpec};
use model::{Action, Address, ArithmeticMode, Error, Mutation, Trace, VaultState, U256};

create_exception!(vault_model, VaultError, PyException);

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidConfig(_) | Error::Parse(_) => PyValueError::new_err(e.to_string()),
        other => VaultError::new_err(other.to_string()),
    }
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn address(text: &str) -> PyResult<Address> {
    text.parse().map_err(value_err)
}

fn mode(text: &str) -> PyResult<ArithmeticMode> {
    text.parse().map_err(value_err)
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("model types serialize")
}

fn int<'py>(py: Python<'py>, x: U256) -> PyResult<Bound<'py, PyAny>> {
    py.import("builtins")?.getattr("int")?.call1((x.to_string(),))
}

/// Immutable vault parameters.
#[pyclass(name = "VaultConfig", module = "vault_model", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyVaultConfig {
    inner: model::VaultConfig,
}

#[pymethods]
impl PyVaultConfig {
    #[new]
    #[pyo3(signature = (delay, t1, creator, max_requests, mode="fixed", self_address=None))]
    fn new(
        delay: u64,
        t1: &str,
        creator: &str,
        max_requests: usize,
        mode: &str,
        self_address: Option<&str>,
    ) -> PyResult<Self> {
        let mut inner =
            model::VaultConfig::new(delay, address(t1)?, address(creator)?, max_requests, self::mode(mode)?);
        if let Some(a) = self_address {
            inner.self_address = address(a)?;
        }
        VaultState::new(&inner).map_err(err)?;
        Ok(PyVaultConfig { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: model::VaultConfig = serde_json::from_str(text).map_err(value_err)?;
        VaultState::new(&inner).map_err(err)?;
        Ok(PyVaultConfig { inner })
    }

    fn to_json(&self) -> String {
        to_json(&self.inner)
    }

    #[getter]
    fn delay(&self) -> u64 {
        self.inner.delay
    }

    #[getter]
    fn t1(&self) -> String {
        self.inner.t1.to_string()
    }

    #[getter]
    fn creator(&self) -> String {
        self.inner.creator.to_string()
    }

    #[getter]
    fn max_requests(&self) -> usize {
        self.inner.max_ledger_size
    }

    #[getter]
    fn mode(&self) -> String {
        self.inner.mode.to_string()
    }

    fn __repr__(&self) -> String {
        format!("VaultConfig({})", self.to_json())
    }
}

/// A simulated chain hosting one vault. Every `submit` mines one block.
#[pyclass(name = "Chain", module = "vault_model")]
struct PyChain {
    inner: model::Chain,
}

#[pymethods]
impl PyChain {
    #[new]
    fn new(config: &PyVaultConfig) -> PyResult<Self> {
        let inner = model::Chain::new(config.inner.clone()).map_err(err)?;
        Ok(PyChain { inner })
    }

    /// Applies `action` (JSON, e.g. `{"type":"Deposit","amount":"5"}`) in
    /// the next block and returns the outcome as JSON.
    fn submit(&mut self, sender: &str, action: &str) -> PyResult<String> {
        let action: Action = serde_json::from_str(action).map_err(value_err)?;
        Ok(to_json(&self.inner.submit(address(sender)?, action)))
    }

    /// Mines `blocks` empty blocks.
    fn advance(&mut self, blocks: u64) -> PyResult<()> {
        self.inner.advance(blocks).map_err(err)
    }

    #[getter]
    fn block(&self) -> u64 {
        self.inner.current_block
    }

    #[getter]
    fn funds<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        int(py, self.inner.vault.funds)
    }

    #[getter]
    fn unlock(&self) -> u64 {
        self.inner.vault.unlock
    }

    #[getter]
    fn destroyed(&self) -> bool {
        self.inner.vault.destroyed
    }

    #[getter]
    fn config(&self) -> PyVaultConfig {
        PyVaultConfig {
            inner: self.inner.config.clone(),
        }
    }

    /// Pending requests as JSON, in ledger order.
    fn requests(&self) -> String {
        let pending: Vec<_> = self.inner.vault.requests().collect();
        to_json(&pending)
    }

    /// Wrapped 256-bit sum of pending request amounts.
    fn request_sum<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        int(py, self.inner.vault.ledger.amount_sum())
    }

    fn balance<'py>(&self, py: Python<'py>, account: &str) -> PyResult<Bound<'py, PyAny>> {
        let b = self.inner.balance(&address(account)?);
        let low = int(py, b.low)?;
        let carries = py.import("builtins")?.getattr("int")?.call1((b.carries.to_string(),))?;
        carries
            .call_method1("__lshift__", (256,))?
            .call_method1("__add__", (low,))
    }

    fn is_conserved(&self) -> bool {
        self.inner.is_conserved()
    }

    fn trace_jsonl(&self) -> String {
        self.inner.trace.to_jsonl()
    }

    fn snapshot(&self) -> String {
        self.inner.to_snapshot()
    }

    #[staticmethod]
    fn from_snapshot(text: &str) -> PyResult<Self> {
        let inner = model::Chain::from_snapshot(text).map_err(err)?;
        Ok(PyChain { inner })
    }

    /// Re-executes a JSONL trace on a fresh chain; raises `VaultError` on
    /// any divergence from the recorded outcomes.
    #[staticmethod]
    fn replay(config: &PyVaultConfig, trace: &str) -> PyResult<Self> {
        let trace = Trace::from_jsonl(trace).map_err(err)?;
        let inner = model::Chain::replay(&config.inner, &trace).map_err(err)?;
        Ok(PyChain { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "Chain(block={}, funds={}, pending={})",
            self.inner.current_block,
            self.inner.vault.funds,
            self.inner.vault.ledger.len()
        )
    }
}

/// Checks every property over a JSONL trace; returns the violations as JSON.
#[pyfunction]
fn check_trace(config: &PyVaultConfig, trace: &str) -> PyResult<String> {
    let trace = Trace::from_jsonl(trace).map_err(err)?;
    let initial = VaultState::new(&config.inner).map_err(err)?;
    let found = properties::check_trace(&initial, &trace).map_err(err)?;
    Ok(to_json(&found))
}

/// Bounded exhaustive exploration; returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (mode="fixed", addresses=4, amount_cap=3, depth=6, delay=2, max_requests=4, budget=4_000_000, mutation=None))]
#[allow(clippy::too_many_arguments)]
fn explore(
    py: Python<'_>,
    mode: &str,
    addresses: usize,
    amount_cap: u64,
    depth: usize,
    delay: u64,
    max_requests: usize,
    budget: usize,
    mutation: Option<&str>,
) -> PyResult<String> {
    let mutation = mutation
        .map(|m| serde_json::from_value::<Mutation>(serde_json::Value::String(m.to_string())).map_err(value_err))
        .transpose()?;
    let config = ExploreConfig {
        addresses,
        amount_cap,
        max_depth: depth,
        delay,
        max_ledger_size: max_requests,
        mode: self::mode(mode)?,
        budget,
        mutation,
        ..ExploreConfig::default()
    };
    let report = py.detach(|| properties::explore(&config)).map_err(err)?;
    Ok(to_json(&report))
}

/// Runs a canned scenario; `params` uses the CLI syntax, e.g. `"K=1,L=1"`.
/// Returns the result as JSON; raises `VaultError` if an assertion failed.
#[pyfunction]
#[pyo3(signature = (name, mode="fixed", params=""))]
fn run_scenario(name: &str, mode: &str, params: &str) -> PyResult<String> {
    let kind: ScenarioKind = name.parse().map_err(err)?;
    let spec = ScenarioSpec::new(kind, self::mode(mode)?)
        .with_params(params)
        .map_err(err)?;
    let result = scenarios::run(&spec).map_err(err)?;
    result.ensure_passed().map_err(err)?;
    Ok(to_json(&result))
}

/// `(id, layer, description)` for every checked property.
#[pyfunction]
fn property_table() -> Vec<(String, String, String)> {
    PropertyId::ALL
        .iter()
        .map(|p| (p.to_string(), p.layer().to_string(), p.description().to_string()))
        .collect()
}

/// Names of the rule mutations accepted by `explore(mutation=...)`.
#[pyfunction]
fn mutations() -> Vec<String> {
    Mutation::ALL.iter().map(|m| format!("{m:?}")).collect()
}

#[pymodule]
fn vault_model(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyVaultConfig>()?;
    m.add_class::<PyChain>()?;
    m.add_function(wrap_pyfunction!(check_trace, m)?)?;
    m.add_function(wrap_pyfunction!(explore, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(property_table, m)?)?;
    m.add_function(wrap_pyfunction!(mutations, m)?)?;
    m.add("VaultError", m.py().get_type::<VaultError>())?;
    Ok(())
}
