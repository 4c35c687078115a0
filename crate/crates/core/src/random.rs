//! Seeded random instances.
//!
//! The stream is `ChaCha8Rng::seed_from_u64(seed)`, a counter-based cipher
//! stream, so a seed fixes the instance on every platform. Draw order: edge
//! weights (pairs in index order), then per request source, destination,
//! release, revenue.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{metric_closure, Bipartition, Edge, Instance, Request};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RandomError {
    #[error("BAD_PARAMS: {0}")]
    BadParams(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomParams {
    pub vertices: usize,
    pub requests: usize,
    pub seed: u64,
    pub segments: u32,
    /// `T/f`, an integer so that all data stays integral.
    pub segment_length: u32,
    /// All revenues 1; otherwise integers in `[1, 10]`.
    pub uniform: bool,
    /// Complete bipartite instance with this minimum edge factor.
    pub bipartite_k: Option<Scalar>,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            vertices: 4,
            requests: 5,
            seed: 0,
            segments: 4,
            segment_length: 5,
            uniform: false,
            bipartite_k: None,
        }
    }
}

fn int(x: u32) -> Scalar {
    Scalar::from_int(x as i64)
}

pub fn gen_random(params: &RandomParams) -> Result<Instance, RandomError> {
    let bad = |m: &str| Err(RandomError::BadParams(m.to_string()));
    if params.vertices < 2 {
        return bad("need at least 2 vertices");
    }
    if params.segments < 2 || params.segment_length < 1 {
        return bad("need f >= 2 and T/f >= 1");
    }
    let l = params.segment_length;
    let horizon = params.segments * l;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let (vertices, sources, dests, bipartition, low) = match &params.bipartite_k {
        None => {
            let vs: Vec<String> = (0..params.vertices).map(|i| format!("v{i}")).collect();
            (vs.clone(), vs.clone(), vs, None, 1)
        }
        Some(k) => {
            if !k.is_positive() || k > &Scalar::one() {
                return bad("k must lie in (0, 1]");
            }
            let n1 = params.vertices / 2;
            let v1: Vec<String> = (1..=n1).map(|i| format!("s{i}")).collect();
            let mut v2 = vec!["o".to_string()];
            v2.extend((1..params.vertices - n1).map(|i| format!("d{i}")));
            let low = u32::try_from((k * int(l)).ceil()).expect("k <= 1").max(1);
            let all = v2.iter().chain(&v1).cloned().collect();
            let bp = Bipartition { sources: v1.clone(), destinations: v2.clone() };
            (all, v1, v2, Some(bp), low)
        }
    };
    let origin = vertices[0].clone();

    let cross = |a: &str, b: &str| match &bipartition {
        None => true,
        Some(bp) => bp.is_source(a) != bp.is_source(b),
    };
    let mut raw = Vec::new();
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            if cross(&vertices[i], &vertices[j]) {
                raw.push(Edge::new(vertices[i].clone(), vertices[j].clone(), int(rng.random_range(low..=l))));
            }
        }
    }
    // Declare closed distances so the listed weights are already metric.
    let metric = metric_closure(&vertices, &raw).map_err(|e| RandomError::BadParams(e.to_string()))?;
    let edges = metric.edges().into_iter().filter(|e| cross(&e.u, &e.v)).collect();

    let mut requests = Vec::with_capacity(params.requests);
    for _ in 0..params.requests {
        let s = sources[rng.random_range(0..sources.len())].clone();
        let d = loop {
            let d = &dests[rng.random_range(0..dests.len())];
            if *d != s {
                break d.clone();
            }
        };
        let t = int(rng.random_range(0..=horizon));
        let p = if params.uniform { Scalar::one() } else { int(rng.random_range(1..=10)) };
        requests.push(Request::new(s, d, t, p));
    }

    Ok(Instance {
        vertices,
        origin,
        edges,
        horizon: int(horizon),
        segments: params.segments,
        min_edge_factor: params.bipartite_k.clone(),
        bipartition,
        requests,
    })
}

/// Mixed test corpus: `f` in {4, 6, 8}, 2 to 6 vertices, 1 to 8 requests,
/// cycling through general and complete bipartite instances (k in
/// {1, 1/2, 2/5}) with uniform and non-uniform revenues. Ids are
/// `"{seed}-{index}"`.
pub fn corpus(count: usize, seed: u64) -> Vec<(String, Instance)> {
    let mut meta = ChaCha8Rng::seed_from_u64(seed);
    let ks = [Scalar::one(), Scalar::new(1, 2), Scalar::new(2, 5)];
    (0..count)
        .map(|i| {
            let kind = i % 4;
            let bip = kind >= 2;
            let params = RandomParams {
                vertices: meta.random_range(if bip { 3..=6 } else { 2..=6 }),
                requests: meta.random_range(1..=8),
                seed: meta.random(),
                segments: [4, 6, 8][i % 3],
                segment_length: meta.random_range(4..=6),
                uniform: kind % 2 == 1,
                bipartite_k: bip.then(|| ks[(i / 4) % 3].clone()),
            };
            let inst = gen_random(&params).expect("corpus parameters are valid");
            (format!("{seed}-{i}"), inst)
        })
        .collect()
}
