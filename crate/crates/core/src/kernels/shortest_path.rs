use super::{symmetric_from_fn, KernelKind, KernelMatrix};
use crate::graphs::{Graph, GraphDataset};
use crate::{Error, Result};

/// `h[l]` = number of vertex pairs at shortest-path distance `l` (Floyd-Warshall);
/// disconnected pairs are left out.
pub fn shortest_path_histogram(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(a, b) in g.edges() {
        d[a][b] = 1;
        d[b][a] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i][k];
            if dik == inf {
                continue;
            }
            for j in 0..n {
                let via = dik + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    let mut hist = vec![0; n.max(1)];
    for i in 0..n {
        for j in i + 1..n {
            if d[i][j] < inf {
                hist[d[i][j]] += 1;
            }
        }
    }
    hist
}

/// Σ over pairs of shortest-path edges of max(0, c − |l − l′|).
pub fn shortest_path_kernel(ds: &GraphDataset, c: f64) -> Result<KernelMatrix> {
    if !(c > 0.0) {
        return Err(Error::invalid("c must be positive"));
    }
    let hists: Vec<Vec<usize>> = ds.graphs.iter().map(shortest_path_histogram).collect();
    let k = symmetric_from_fn(ds.len(), |i, j| {
        let mut total = 0.0;
        for (l, &a) in hists[i].iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (m, &b) in hists[j].iter().enumerate() {
                let w = c - (l as f64 - m as f64).abs();
                if b > 0 && w > 0.0 {
                    total += (a * b) as f64 * w;
                }
            }
        }
        total
    });
    KernelMatrix::new(KernelKind::ShortestPath, (0..ds.len()).collect(), k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: Graph, b: Graph, c: f64) -> f64 {
        let ds = GraphDataset::new("t", "unit", vec![a, b]);
        shortest_path_kernel(&ds, c).unwrap().values[(0, 1)]
    }

    #[test]
    fn hand_counted_values() {
        assert_eq!(pair(Graph::path(2).unwrap(), Graph::path(2).unwrap(), 1.0), 1.0);
        assert_eq!(pair(Graph::path(3).unwrap(), Graph::path(3).unwrap(), 2.0), 14.0);
        let far = Graph::new(4, [(0, 1)]).unwrap();
        assert_eq!(shortest_path_histogram(&far), vec![0, 1, 0, 0]);
        let edge = Graph::path(2).unwrap();
        assert_eq!(pair(edge, Graph::path(4).unwrap(), 0.5), 3.0 * 0.5);
    }

    #[test]
    fn histogram_of_cycle() {
        assert_eq!(shortest_path_histogram(&Graph::cycle(6).unwrap()), vec![0, 6, 6, 3, 0, 0]);
    }
}
