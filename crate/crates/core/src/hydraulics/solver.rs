//! Newton iteration on nodal heads (global gradient scheme).

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::hydraulics::headloss::{hw_loss_and_gradient, ZERO_FLOW};
use crate::hydraulics::model::{HydraulicModel, LinkLaw};
use crate::hydraulics::SolverError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Relative flow-change tolerance Σ|ΔQ|/Σ|Q|.
    pub accuracy: f64,
    pub max_iterations: usize,
    /// Initial step fraction in (0, 1]; halved when the flow change grows.
    pub damping: f64,
    /// Largest accepted |Δhead − loss(Q)| over links at convergence, m.
    pub head_tolerance: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            accuracy: 1e-3,
            max_iterations: 100,
            damping: 1.0,
            head_tolerance: 1e-8,
        }
    }
}

/// Everything that varies between snapshots, indexed like the model.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotInput {
    /// Per node, m³/s; ignored for fixed-head nodes.
    pub demand: Vec<f64>,
    /// Per node, m; used for reservoirs and tanks only.
    pub fixed_head: Vec<f64>,
    pub link_open: Vec<bool>,
    /// Relative pump speed per link; ignored for non-pumps.
    pub speed: Vec<f64>,
    /// Orifice coefficient `Cd·A·√(2g)` per leak site.
    pub emitter_coef: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSolution {
    pub head: Vec<f64>,
    pub flow: Vec<f64>,
    pub emitter_flow: Vec<f64>,
    pub iterations: usize,
    pub relative_change: f64,
}

const VALVE_MIN_GRADIENT: f64 = 1e-6;

fn link_loss(law: &LinkLaw, flow: f64, speed: f64) -> (f64, f64) {
    match law {
        LinkLaw::Pipe { resistance, .. } => hw_loss_and_gradient(*resistance, flow),
        LinkLaw::Valve { resistance } => {
            let loss = resistance * flow * flow.abs();
            (loss, (2.0 * resistance * flow.abs()).max(VALVE_MIN_GRADIENT))
        }
        LinkLaw::Pump { fit } => fit.loss_and_gradient(flow, speed),
    }
}

/// Emitter "link" from the leak node to ground: `h = q|q|/c²`.
fn emitter_loss(coef: f64, flow: f64) -> (f64, f64) {
    let c2 = coef * coef;
    (flow * flow.abs() / c2, 2.0 * flow.abs().max(ZERO_FLOW) / c2)
}

pub struct GgaSolver<'a> {
    model: &'a HydraulicModel,
    settings: SolverSettings,
}

impl<'a> GgaSolver<'a> {
    pub fn new(model: &'a HydraulicModel, settings: SolverSettings) -> Self {
        Self { model, settings }
    }

    fn effective_open(&self, input: &SnapshotInput, k: usize) -> bool {
        input.link_open[k]
            && match self.model.links[k].law {
                LinkLaw::Pump { .. } => input.speed[k] > 0.0,
                _ => true,
            }
    }

    /// Breadth-first depth of every node from the fixed-head nodes over
    /// open links; `None` when unreachable.
    fn depths(&self, open: &[bool]) -> Vec<Option<usize>> {
        let m = self.model;
        let mut adj = vec![Vec::new(); m.node_count()];
        for (k, l) in m.links.iter().enumerate() {
            if open[k] {
                adj[l.from].push(l.to);
                adj[l.to].push(l.from);
            }
        }
        let mut depth = vec![None; m.node_count()];
        let mut queue = VecDeque::new();
        for n in 0..m.node_count() {
            if m.is_fixed(n) {
                depth[n] = Some(0);
                queue.push_back(n);
            }
        }
        while let Some(u) = queue.pop_front() {
            let d = depth[u].unwrap_or(0) + 1;
            for &v in &adj[u] {
                if depth[v].is_none() {
                    depth[v] = Some(d);
                    queue.push_back(v);
                }
            }
        }
        depth
    }

    /// Solves one snapshot. `warm_flow` (per link) seeds the iteration;
    /// otherwise flows start at 1e-3 m³/s directed away from the sources.
    pub fn solve(&self, input: &SnapshotInput, warm_flow: Option<&[f64]>) -> Result<SnapshotSolution, SolverError> {
        let m = self.model;
        let n_nodes = m.node_count();
        let n_links = m.link_count();
        let open: Vec<bool> = (0..n_links).map(|k| self.effective_open(input, k)).collect();
        let depth = self.depths(&open);

        for n in 0..n_nodes {
            if !m.is_fixed(n) && depth[n].is_none() && input.demand[n] > 0.0 {
                return Err(SolverError::DisconnectedDemand(m.node_ids[n].clone()));
            }
        }

        // Unknown heads: connected junctions.
        let mut row = vec![usize::MAX; n_nodes];
        let mut unknowns = Vec::new();
        for n in 0..n_nodes {
            if !m.is_fixed(n) && depth[n].is_some() {
                row[n] = unknowns.len();
                unknowns.push(n);
            }
        }

        let mut head: Vec<f64> = (0..n_nodes)
            .map(|n| {
                if m.is_fixed(n) {
                    input.fixed_head[n]
                } else {
                    m.elevation[n]
                }
            })
            .collect();
        let mut flow: Vec<f64> = match warm_flow {
            Some(w) => (0..n_links).map(|k| if open[k] { w[k] } else { 0.0 }).collect(),
            None => m
                .links
                .iter()
                .enumerate()
                .map(|(k, l)| {
                    if !open[k] {
                        0.0
                    } else if matches!(l.law, LinkLaw::Pump { .. }) || depth[l.from] <= depth[l.to] {
                        1e-3
                    } else {
                        -1e-3
                    }
                })
                .collect(),
        };
        let emitter_active: Vec<bool> = m
            .leak_sites
            .iter()
            .zip(&input.emitter_coef)
            .map(|(s, c)| *c > 0.0 && depth[s.node].is_some())
            .collect();
        let mut emitter: Vec<f64> = input
            .emitter_coef
            .iter()
            .zip(&emitter_active)
            .map(|(c, a)| if *a { c * 10f64.sqrt() } else { 0.0 })
            .collect();

        if unknowns.is_empty() {
            // Only fixed-head nodes are connected: flows follow directly.
            for k in 0..n_links {
                flow[k] = if open[k] {
                    let l = &m.links[k];
                    invert_loss(&l.law, head[l.from] - head[l.to], input.speed[k])
                } else {
                    0.0
                };
            }
            return Ok(SnapshotSolution {
                head,
                flow,
                emitter_flow: emitter,
                iterations: 0,
                relative_change: 0.0,
            });
        }

        let nu = unknowns.len();
        let mut damping = self.settings.damping.clamp(f64::MIN_POSITIVE, 1.0);
        let mut prev_change = f64::INFINITY;
        let mut p = vec![0.0; n_links];
        let mut y = vec![0.0; n_links];
        let mut pe = vec![0.0; emitter.len()];
        let mut ye = vec![0.0; emitter.len()];
        let mut last_change = f64::INFINITY;

        for iteration in 1..=self.settings.max_iterations {
            let mut a = DMatrix::<f64>::zeros(nu, nu);
            let mut rhs = DVector::<f64>::zeros(nu);
            for &n in &unknowns {
                rhs[row[n]] = -input.demand[n];
            }
            for (k, l) in m.links.iter().enumerate() {
                if !open[k] {
                    continue;
                }
                let (loss, grad) = link_loss(&l.law, flow[k], input.speed[k]);
                p[k] = 1.0 / grad;
                y[k] = loss / grad;
                let carried = flow[k] - y[k];
                let (i, j) = (row[l.from], row[l.to]);
                if i != usize::MAX {
                    a[(i, i)] += p[k];
                    rhs[i] -= carried;
                }
                if j != usize::MAX {
                    a[(j, j)] += p[k];
                    rhs[j] += carried;
                }
                match (i != usize::MAX, j != usize::MAX) {
                    (true, true) => {
                        a[(i, j)] -= p[k];
                        a[(j, i)] -= p[k];
                    }
                    (true, false) => rhs[i] += p[k] * head[l.to],
                    (false, true) => rhs[j] += p[k] * head[l.from],
                    (false, false) => {}
                }
            }
            for (s, site) in m.leak_sites.iter().enumerate() {
                if !emitter_active[s] {
                    continue;
                }
                let (loss, grad) = emitter_loss(input.emitter_coef[s], emitter[s]);
                pe[s] = 1.0 / grad;
                ye[s] = loss / grad;
                let i = row[site.node];
                a[(i, i)] += pe[s];
                rhs[i] += -(emitter[s] - ye[s]) + pe[s] * m.elevation[site.node];
            }

            let solution = match a.clone().cholesky() {
                Some(ch) => ch.solve(&rhs),
                None => a.lu().solve(&rhs).ok_or(SolverError::SingularSystem { iteration })?,
            };
            for &n in &unknowns {
                head[n] = solution[row[n]];
            }
            if head.iter().any(|h| !h.is_finite()) {
                return Err(SolverError::SingularSystem { iteration });
            }

            let mut sum_change = 0.0;
            let mut sum_flow = 0.0;
            for (k, l) in m.links.iter().enumerate() {
                if !open[k] {
                    continue;
                }
                let target = flow[k] - y[k] + p[k] * (head[l.from] - head[l.to]);
                let delta = damping * (target - flow[k]);
                flow[k] += delta;
                sum_change += delta.abs();
                sum_flow += flow[k].abs();
            }
            for (s, site) in m.leak_sites.iter().enumerate() {
                if !emitter_active[s] {
                    continue;
                }
                let target = (emitter[s] - ye[s] + pe[s] * (head[site.node] - m.elevation[site.node])).max(0.0);
                let delta = damping * (target - emitter[s]);
                emitter[s] += delta;
                sum_change += delta.abs();
                sum_flow += emitter[s].abs();
            }
            let change = if sum_flow > 0.0 {
                sum_change / sum_flow
            } else {
                sum_change
            };
            last_change = change;

            if change <= self.settings.accuracy {
                let energy = self.max_energy_residual(input, &open, &flow, &emitter, &emitter_active, &head);
                if energy <= self.settings.head_tolerance || change <= 1e-13 {
                    return Ok(SnapshotSolution {
                        head,
                        flow,
                        emitter_flow: emitter,
                        iterations: iteration,
                        relative_change: change,
                    });
                }
            }
            if iteration > 4 && change > prev_change {
                damping = (damping * 0.5).max(1.0 / 64.0);
            } else if damping < 1.0 && change < 0.5 * prev_change {
                damping = (damping * 2.0).min(self.settings.damping.min(1.0));
            }
            prev_change = change;
        }
        Err(SolverError::NonConvergence {
            iterations: self.settings.max_iterations,
            residual: last_change,
        })
    }

    fn max_energy_residual(
        &self,
        input: &SnapshotInput,
        open: &[bool],
        flow: &[f64],
        emitter: &[f64],
        emitter_active: &[bool],
        head: &[f64],
    ) -> f64 {
        let m = self.model;
        let mut worst: f64 = 0.0;
        for (k, l) in m.links.iter().enumerate() {
            if open[k] {
                let (loss, _) = link_loss(&l.law, flow[k], input.speed[k]);
                worst = worst.max((head[l.from] - head[l.to] - loss).abs());
            }
        }
        for (s, site) in m.leak_sites.iter().enumerate() {
            if emitter_active[s] && emitter[s] > 0.0 {
                let (loss, _) = emitter_loss(input.emitter_coef[s], emitter[s]);
                worst = worst.max((head[site.node] - m.elevation[site.node] - loss).abs());
            }
        }
        worst
    }
}

/// Flow through a link joining two fixed heads with difference `dh`.
fn invert_loss(law: &LinkLaw, dh: f64, speed: f64) -> f64 {
    // Bisection on the monotone loss law.
    let (mut lo, mut hi) = (-1e3, 1e3);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if link_loss(law, mid, speed).0 < dh {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
