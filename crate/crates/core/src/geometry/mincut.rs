//! Minimal cuts separating a boundary region from its complement.
//!
//! Internal edges weigh `ln b`, external legs `ln a`. Each leg gets its own
//! node so that cutting the leg itself is an option. Max flow is Dinic's
//! algorithm on f64 capacities; the cut is read off the residual graph.

use super::Geometry;
use crate::{Error, Result};
use serde::Serialize;
use std::collections::VecDeque;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutResult {
    pub cut_weight: f64,
    /// Internal edge ids crossing the cut.
    pub cut_edges: Vec<usize>,
    /// External leg ids crossing the cut.
    pub cut_legs: Vec<usize>,
}

const EPS: f64 = 1e-12;

struct Arc {
    to: usize,
    cap: f64,
}

struct Network {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

impl Network {
    fn new(n: usize) -> Self {
        Network { arcs: Vec::new(), out: vec![Vec::new(); n] }
    }

    /// Adds an arc pair; `back` is the reverse capacity (equal for undirected).
    fn add(&mut self, u: usize, v: usize, cap: f64, back: f64) {
        self.out[u].push(self.arcs.len());
        self.arcs.push(Arc { to: v, cap });
        self.out[v].push(self.arcs.len());
        self.arcs.push(Arc { to: u, cap: back });
    }

    fn levels(&self, s: usize) -> Vec<Option<usize>> {
        let mut level = vec![None; self.out.len()];
        level[s] = Some(0);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.out[u] {
                let arc = &self.arcs[a];
                if arc.cap > EPS && level[arc.to].is_none() {
                    level[arc.to] = Some(level[u].unwrap() + 1);
                    queue.push_back(arc.to);
                }
            }
        }
        level
    }

    fn push(&mut self, u: usize, t: usize, f: f64, level: &[Option<usize>], it: &mut [usize]) -> f64 {
        if u == t {
            return f;
        }
        while it[u] < self.out[u].len() {
            let a = self.out[u][it[u]];
            let (to, cap) = (self.arcs[a].to, self.arcs[a].cap);
            if cap > EPS && level[to] == level[u].map(|l| l + 1) {
                let pushed = self.push(to, t, f.min(cap), level, it);
                if pushed > EPS {
                    self.arcs[a].cap -= pushed;
                    self.arcs[a ^ 1].cap += pushed;
                    return pushed;
                }
            }
            it[u] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut flow = 0.0;
        loop {
            let level = self.levels(s);
            if level[t].is_none() {
                return flow;
            }
            let mut it = vec![0; self.out.len()];
            loop {
                let f = self.push(s, t, f64::INFINITY, &level, &mut it);
                if f <= EPS {
                    break;
                }
                flow += f;
            }
        }
    }
}

/// Minimal-weight set of edges and legs separating the legs in `region` from
/// all other legs.
pub fn min_cut(g: &Geometry, region: &[usize]) -> Result<CutResult> {
    let n = g.n_legs();
    let mut in_region = vec![false; n];
    for &l in region {
        if l >= n {
            return Err(Error::invalid(format!("leg {l} does not exist")));
        }
        in_region[l] = true;
    }
    let size = in_region.iter().filter(|&&x| x).count();
    if size == 0 || size == n {
        return Err(Error::invalid("cut region must be a proper nonempty subset of the legs"));
    }
    let n_v = g.n_vertices();
    let (s, t) = (n_v + n, n_v + n + 1);
    let mut net = Network::new(n_v + n + 2);
    for e in g.internal_edges() {
        let w = (e.b as f64).ln();
        net.add(e.u, e.v, w, w);
    }
    for (i, l) in g.external_legs().iter().enumerate() {
        let w = (l.a as f64).ln();
        net.add(l.vertex, n_v + i, w, w);
    }
    for (i, &r) in in_region.iter().enumerate() {
        if r {
            net.add(s, n_v + i, f64::INFINITY, 0.0);
        } else {
            net.add(n_v + i, t, f64::INFINITY, 0.0);
        }
    }
    let flow = net.max_flow(s, t);
    let reach = net.levels(s);
    let side = |x: usize| reach[x].is_some();
    let cut_edges: Vec<usize> = (0..g.n_internal())
        .filter(|&e| {
            let ed = g.internal_edges()[e];
            side(ed.u) != side(ed.v)
        })
        .collect();
    let cut_legs: Vec<usize> =
        (0..n).filter(|&i| side(g.external_legs()[i].vertex) != side(n_v + i)).collect();
    Ok(CutResult { cut_weight: flow, cut_edges, cut_legs })
}
