//! Network compiled into index-based arrays for the solver.
//!
//! Original nodes and links keep their network indices. Each leaking pipe
//! is split at its midpoint: the upstream half keeps the pipe's index, a
//! virtual junction and the downstream half are appended after all
//! original nodes and links.

use crate::hydraulics::headloss::{hazen_williams_resistance, minor_loss_resistance};
use crate::hydraulics::pump::PumpCurveFit;
use crate::hydraulics::SolverError;
use crate::network::{validate, LinkKind, Network, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkLaw {
    Pipe {
        resistance: f64,
        length: f64,
        diameter: f64,
        roughness: f64,
    },
    Pump {
        fit: PumpCurveFit,
    },
    Valve {
        resistance: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelLink {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub law: LinkLaw,
    /// Index of the network link this one came from.
    pub origin: usize,
    /// Water volume held in the link, m³ (zero for pumps and valves).
    pub volume: f64,
}

/// Virtual junction carrying a pipe leak.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakSite {
    pub pipe: usize,
    pub node: usize,
    pub downstream_half: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HydraulicModel {
    pub node_ids: Vec<String>,
    pub node_kinds: Vec<NodeKind>,
    pub elevation: Vec<f64>,
    pub links: Vec<ModelLink>,
    pub leak_sites: Vec<LeakSite>,
    pub original_nodes: usize,
    pub original_links: usize,
}

impl HydraulicModel {
    /// Compiles `network`, splitting every pipe in `leak_pipes` (network
    /// link indices; duplicates share one site).
    pub fn compile(network: &Network, leak_pipes: &[usize]) -> Result<Self, SolverError> {
        let violations = validate(network);
        if !violations.is_empty() {
            return Err(SolverError::InvalidNetwork(violations));
        }
        let n = network.node_count();
        let mut node_ids: Vec<String> = (0..n).map(|i| network.node_id(i).to_string()).collect();
        let mut node_kinds: Vec<NodeKind> = (0..n).map(|i| network.node_kind(i)).collect();
        let mut elevation: Vec<f64> = (0..n).map(|i| network.node_elevation(i)).collect();

        let mut links = Vec::with_capacity(network.link_count());
        for k in 0..network.link_count() {
            let (from, to) = network.link_ends(k).expect("validated network");
            let (law, volume) = match network.link_kind(k) {
                LinkKind::Pipe => {
                    let p = &network.pipes()[k];
                    (
                        LinkLaw::Pipe {
                            resistance: hazen_williams_resistance(p.length, p.diameter, p.roughness),
                            length: p.length,
                            diameter: p.diameter,
                            roughness: p.roughness,
                        },
                        p.volume(),
                    )
                }
                LinkKind::Pump => {
                    let p = &network.pumps()[k - network.pump_offset()];
                    let curve = network.curve(&p.curve_id).expect("validated network");
                    (
                        LinkLaw::Pump {
                            fit: PumpCurveFit::from_curve(curve)?,
                        },
                        0.0,
                    )
                }
                LinkKind::Valve => {
                    let v = &network.valves()[k - network.valve_offset()];
                    (
                        LinkLaw::Valve {
                            resistance: minor_loss_resistance(v.minor_loss_coef, v.diameter),
                        },
                        0.0,
                    )
                }
            };
            links.push(ModelLink {
                id: network.link_id(k).to_string(),
                from,
                to,
                law,
                origin: k,
                volume,
            });
        }

        let mut leak_sites: Vec<LeakSite> = Vec::new();
        for &pipe in leak_pipes {
            if leak_sites.iter().any(|s| s.pipe == pipe) {
                continue;
            }
            if network.link_kind(pipe) != LinkKind::Pipe {
                return Err(SolverError::NotAPipe(network.link_id(pipe).to_string()));
            }
            let p = &network.pipes()[pipe];
            let node = node_ids.len();
            let (from, to) = (links[pipe].from, links[pipe].to);
            node_ids.push(format!("{}__leak", p.id));
            node_kinds.push(NodeKind::Junction);
            elevation.push(0.5 * (elevation[from] + elevation[to]));

            let half = LinkLaw::Pipe {
                resistance: hazen_williams_resistance(0.5 * p.length, p.diameter, p.roughness),
                length: 0.5 * p.length,
                diameter: p.diameter,
                roughness: p.roughness,
            };
            links[pipe].to = node;
            links[pipe].law = half;
            links[pipe].volume = 0.5 * p.volume();
            let downstream_half = links.len();
            links.push(ModelLink {
                id: format!("{}__2", p.id),
                from: node,
                to,
                law: half,
                origin: pipe,
                volume: 0.5 * p.volume(),
            });
            leak_sites.push(LeakSite {
                pipe,
                node,
                downstream_half,
            });
        }

        Ok(Self {
            node_ids,
            node_kinds,
            elevation,
            links,
            leak_sites,
            original_nodes: n,
            original_links: network.link_count(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn is_fixed(&self, node: usize) -> bool {
        self.node_kinds[node] != NodeKind::Junction
    }

    pub fn leak_site_for(&self, pipe: usize) -> Option<usize> {
        self.leak_sites.iter().position(|s| s.pipe == pipe)
    }

    /// Signed flow imbalance (inflow − outflow − demand) at every junction.
    pub fn mass_residuals(&self, flow: &[f64], demand: &[f64]) -> Vec<(usize, f64)> {
        let mut balance = vec![0.0; self.node_count()];
        for (k, l) in self.links.iter().enumerate() {
            balance[l.from] -= flow[k];
            balance[l.to] += flow[k];
        }
        (0..self.node_count())
            .filter(|&n| !self.is_fixed(n))
            .map(|n| (n, balance[n] - demand[n]))
            .collect()
    }

    /// `head(from) − head(to) − hazen_williams_headloss(flow)` for each open pipe.
    pub fn pipe_energy_residuals(&self, flow: &[f64], head: &[f64], open: &[bool]) -> Vec<(usize, f64)> {
        self.links
            .iter()
            .enumerate()
            .filter(|(k, _)| open[*k])
            .filter_map(|(k, l)| match l.law {
                LinkLaw::Pipe {
                    length,
                    diameter,
                    roughness,
                    ..
                } => {
                    let loss = crate::hydraulics::hazen_williams_headloss(flow[k], length, diameter, roughness);
                    Some((k, head[l.from] - head[l.to] - loss))
                }
                _ => None,
            })
            .collect()
    }
}
