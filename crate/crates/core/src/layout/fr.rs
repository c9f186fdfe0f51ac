use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Layout, DEFAULT_NN_DISTANCE_UM};
use crate::graphs::Graph;
use crate::{Error, Result};

/// Force-directed layout (Fruchterman & Reingold, 1991) with linear cooling,
/// rescaled so the median edge length is `target_um` (default 5.3 µm when
/// `None`).
pub fn fruchterman_reingold(
    g: &Graph,
    seed: u64,
    iterations: usize,
    target_um: Option<f64>,
) -> Result<Layout> {
    if iterations == 0 {
        return Err(Error::invalid("iterations must be at least 1"));
    }
    let target = target_um.unwrap_or(DEFAULT_NN_DISTANCE_UM);
    let n = g.node_count();
    if n == 1 {
        return Layout::new(vec![[0.0, 0.0]]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
        .collect();
    let k = (1.0 / n as f64).sqrt();
    let t0 = 0.1;
    for it in 0..iterations {
        let temp = t0 * (1.0 - it as f64 / iterations as f64);
        let mut disp = vec![[0.0f64; 2]; n];
        for a in 0..n {
            for b in a + 1..n {
                let mut d = [pos[a][0] - pos[b][0], pos[a][1] - pos[b][1]];
                let mut r = d[0].hypot(d[1]);
                if r < 1e-9 {
                    d = [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
                    r = d[0].hypot(d[1]).max(1e-9);
                }
                let f = k * k / r;
                for c in 0..2 {
                    disp[a][c] += d[c] / r * f;
                    disp[b][c] -= d[c] / r * f;
                }
            }
        }
        for &(a, b) in g.edges() {
            let d = [pos[a][0] - pos[b][0], pos[a][1] - pos[b][1]];
            let r = d[0].hypot(d[1]).max(1e-9);
            let f = r * r / k;
            for c in 0..2 {
                disp[a][c] -= d[c] / r * f;
                disp[b][c] += d[c] / r * f;
            }
        }
        for (p, d) in pos.iter_mut().zip(&disp) {
            let len = d[0].hypot(d[1]);
            if len > 0.0 {
                let step = len.min(temp);
                p[0] += d[0] / len * step;
                p[1] += d[1] / len * step;
            }
        }
    }
    let layout = Layout::new(pos)?.centered();
    let scale = match layout.median_edge_length(g) {
        Some(m) if m > 0.0 => target / m,
        _ => target / layout.min_distance(),
    };
    Ok(layout.scaled(scale))
}
