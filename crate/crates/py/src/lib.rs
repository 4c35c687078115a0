//! Python bindings. Instances, schedules and reports cross the boundary as
//! JSON text in the same format the CLI reads and writes; rationals are
//! `"a/b"` strings.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use roldarp_core::adversary::{gen_fig1 as core_gen_fig1, Fig1Params};
use roldarp_core::analysis::{check_bound as core_check_bound, BoundId};
use roldarp_core::bipartite::to_bipartite as core_to_bipartite;
use roldarp_core::oracle::optimal_offline_capped;
use roldarp_core::random::{gen_random as core_gen_random, RandomParams};
use roldarp_core::sbp::run_sbp as core_run_sbp;
use roldarp_core::{validate_instance, Instance, Scalar};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn scalar(s: &str) -> PyResult<Scalar> {
    s.parse().map_err(err)
}

fn instance(json: &str) -> PyResult<Instance> {
    let inst = Instance::from_json(json).map_err(err)?;
    let report = validate_instance(&inst);
    if !report.is_valid() {
        return Err(err(format!("INVALID_INSTANCE: {report}")));
    }
    Ok(inst)
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializes")
}

/// Two-row lower-bound instance and its witness schedule, as JSON.
#[pyfunction]
#[pyo3(signature = (f, h, b, eps))]
fn gen_fig1(f: u32, h: &str, b: &str, eps: &str) -> PyResult<(String, String)> {
    let g = core_gen_fig1(&Fig1Params { f, h: scalar(h)?, b: scalar(b)?, eps: scalar(eps)? }).map_err(err)?;
    Ok((g.instance.to_json(), json(&g.witness)))
}

/// Seeded random instance; pass `k` for a bipartite one.
#[pyfunction]
#[pyo3(signature = (vertices, requests, seed, uniform=false, k=None, f=4, segment_length=5))]
fn gen_random(
    vertices: usize,
    requests: usize,
    seed: u64,
    uniform: bool,
    k: Option<&str>,
    f: u32,
    segment_length: u32,
) -> PyResult<String> {
    let bipartite_k = k.map(scalar).transpose()?;
    let params = RandomParams { vertices, requests, seed, segments: f, segment_length, uniform, bipartite_k };
    Ok(core_gen_random(&params).map_err(err)?.to_json())
}

/// `(revenue, schedule_json)` of the segmented algorithm.
#[pyfunction]
fn run_sbp(instance_json: &str) -> PyResult<(String, String)> {
    let run = core_run_sbp(&instance(instance_json)?).map_err(err)?;
    Ok((run.profile.total.to_string(), json(&run.schedule)))
}

/// `(revenue, schedule_json)` of an optimal offline schedule.
#[pyfunction]
#[pyo3(signature = (instance_json, horizon=None, cap=16))]
fn optimal_offline(instance_json: &str, horizon: Option<&str>, cap: usize) -> PyResult<(String, String)> {
    let h = horizon.map(scalar).transpose()?;
    let opt = optimal_offline_capped(&instance(instance_json)?, h.as_ref(), cap).map_err(err)?;
    Ok((opt.revenue.to_string(), json(&opt.schedule)))
}

/// Bound report JSON; raises on unmet hypotheses.
#[pyfunction]
fn check_bound(instance_json: &str, bound: &str) -> PyResult<String> {
    let id: BoundId = bound.parse().map_err(err)?;
    Ok(json(&core_check_bound(&instance(instance_json)?, id).map_err(err)?))
}

/// Bipartite instance JSON equivalent to a general one.
#[pyfunction]
#[pyo3(signature = (instance_json, eps=None))]
fn to_bipartite(instance_json: &str, eps: Option<&str>) -> PyResult<String> {
    let e = eps.map(scalar).transpose()?;
    Ok(core_to_bipartite(&instance(instance_json)?, e.as_ref()).map_err(err)?.instance.to_json())
}

#[pymodule]
fn roldarp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(gen_fig1, m)?)?;
    m.add_function(wrap_pyfunction!(gen_random, m)?)?;
    m.add_function(wrap_pyfunction!(run_sbp, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_offline, m)?)?;
    m.add_function(wrap_pyfunction!(check_bound, m)?)?;
    m.add_function(wrap_pyfunction!(to_bipartite, m)?)?;
    Ok(())
}
