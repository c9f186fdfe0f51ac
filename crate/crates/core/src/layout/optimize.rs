use serde::{Deserialize, Serialize};

use super::{interaction_ratio, Layout, DEFAULT_MIN_DISTANCE_UM, DEFAULT_NN_DISTANCE_UM};
use crate::graphs::Graph;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutConfig {
    pub nn_distance_um: f64,
    pub min_distance_um: f64,
    pub sweeps: usize,
    /// Step levels per sweep; the step halves after each level.
    pub step_levels: usize,
    /// First step as a fraction of the nearest-neighbor distance.
    pub initial_step: f64,
    /// Sharpness of the soft min/max in the smooth objective.
    pub beta: f64,
    pub fr_iterations: usize,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            nn_distance_um: DEFAULT_NN_DISTANCE_UM,
            min_distance_um: DEFAULT_MIN_DISTANCE_UM,
            sweeps: 3,
            step_levels: 6,
            initial_step: 0.3,
            beta: 10.0,
            fr_iterations: 300,
        }
    }
}

/// Soft version of `log(min non-edge distance) − log(max edge distance)`.
pub fn smooth_objective(g: &Graph, layout: &Layout, beta: f64) -> f64 {
    let n = g.node_count();
    let mut non_edge = Vec::new();
    let mut edge = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let l = layout.distance(a, b).ln();
            if g.has_edge(a, b) {
                edge.push(l);
            } else {
                non_edge.push(l);
            }
        }
    }
    soft_min(&non_edge, beta) - soft_max(&edge, beta)
}

fn soft_max(xs: &[f64], beta: f64) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (beta * (x - m)).exp()).sum::<f64>().ln() / beta
}

fn soft_min(xs: &[f64], beta: f64) -> f64 {
    let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
    -soft_max(&neg, beta)
}

fn min_distance_from(layout: &Layout, v: usize) -> f64 {
    (0..layout.len())
        .filter(|&w| w != v)
        .map(|w| layout.distance(v, w))
        .fold(f64::INFINITY, f64::min)
}

/// Coordinate descent on node positions. Each node in turn tries eight
/// compass moves; a move is kept only if the exact interaction ratio does not
/// drop, the smooth objective improves, and the node keeps at least the
/// minimum distance to every other atom. The result is rescaled so the
/// median edge matches the configured nearest-neighbor distance (enlarged
/// further only if the floor requires it).
pub fn optimize_ud_layout(g: &Graph, start: &Layout, config: &LayoutConfig) -> Result<Layout> {
    let n = g.node_count();
    if start.len() != n {
        return Err(Error::invalid("layout does not match the graph"));
    }
    if !(config.min_distance_um > 0.0 && config.nn_distance_um >= config.min_distance_um) {
        return Err(Error::Constraint(format!(
            "minimum distance {} µm incompatible with nearest-neighbor distance {} µm",
            config.min_distance_um, config.nn_distance_um
        )));
    }
    let start_ratio = interaction_ratio(g, start)?.ratio;
    let mut layout = start.normalized(g, config.nn_distance_um, config.min_distance_um)?;
    if start_ratio.is_infinite() {
        return Ok(layout);
    }
    let mut ratio = interaction_ratio(g, &layout)?.ratio;
    let mut objective = smooth_objective(g, &layout, config.beta);
    const DIRS: [(f64, f64); 8] = [
        (1.0, 0.0),
        (-1.0, 0.0),
        (0.0, 1.0),
        (0.0, -1.0),
        (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
        (std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2),
        (-std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
        (-std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2),
    ];
    for _ in 0..config.sweeps {
        let mut step = config.initial_step * config.nn_distance_um;
        for _ in 0..config.step_levels {
            for v in 0..n {
                for _ in 0..8 {
                    let origin = layout.positions[v];
                    let floor = config.min_distance_um.min(min_distance_from(&layout, v));
                    let mut best: Option<([f64; 2], f64, f64)> = None;
                    for (dx, dy) in DIRS {
                        layout.positions[v] = [origin[0] + step * dx, origin[1] + step * dy];
                        if min_distance_from(&layout, v) < floor {
                            continue;
                        }
                        let r = interaction_ratio(g, &layout)?.ratio;
                        let s = smooth_objective(g, &layout, config.beta);
                        let threshold = best.map_or(objective + 1e-12, |b| b.2);
                        if r >= ratio && s > threshold {
                            best = Some((layout.positions[v], r, s));
                        }
                    }
                    layout.positions[v] = origin;
                    match best {
                        Some((p, r, s)) => {
                            layout.positions[v] = p;
                            ratio = r;
                            objective = s;
                        }
                        None => break,
                    }
                }
            }
            step *= 0.5;
        }
    }
    let out = layout.normalized(g, config.nn_distance_um, config.min_distance_um)?;
    debug_assert!(interaction_ratio(g, &out)?.ratio >= start_ratio * (1.0 - 1e-9));
    Ok(out)
}
