//! Integer coordinates on the triangular lattice with basis
//! `a1 = (1, 0)` and `a2 = (1/2, √3/2)`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub i: i64,
    pub j: i64,
}

/// Lattice offsets of the six nearest neighbors.
pub const NEIGHBOR_OFFSETS: [(i64, i64); 6] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)];

impl LatticePoint {
    pub const fn new(i: i64, j: i64) -> Self {
        LatticePoint { i, j }
    }

    /// Cartesian position for the given lattice spacing.
    pub fn position(self, spacing: f64) -> [f64; 2] {
        [
            (self.i as f64 + 0.5 * self.j as f64) * spacing,
            self.j as f64 * 3f64.sqrt() / 2.0 * spacing,
        ]
    }

    /// Nearest lattice point to a Cartesian position.
    pub fn nearest(pos: [f64; 2], spacing: f64) -> Self {
        let jf = pos[1] / spacing * 2.0 / 3f64.sqrt();
        let i_f = pos[0] / spacing - 0.5 * jf;
        let (i0, j0) = (i_f.floor() as i64, jf.floor() as i64);
        let mut best = LatticePoint::new(i0, j0);
        let mut best_d = f64::INFINITY;
        for di in 0..=1 {
            for dj in 0..=1 {
                let cand = LatticePoint::new(i0 + di, j0 + dj);
                let p = cand.position(spacing);
                let d = (p[0] - pos[0]).powi(2) + (p[1] - pos[1]).powi(2);
                if d < best_d {
                    best_d = d;
                    best = cand;
                }
            }
        }
        best
    }

    pub fn neighbors(self) -> impl Iterator<Item = LatticePoint> {
        NEIGHBOR_OFFSETS
            .iter()
            .map(move |&(di, dj)| LatticePoint::new(self.i + di, self.j + dj))
    }

    /// Squared distance in units of the spacing; always an integer.
    pub fn dist2(self, other: LatticePoint) -> i64 {
        let (di, dj) = (self.i - other.i, self.j - other.j);
        di * di + di * dj + dj * dj
    }

    pub fn translated(self, di: i64, dj: i64) -> Self {
        LatticePoint::new(self.i + di, self.j + dj)
    }

    /// Rotation by `k · 60°` about the origin.
    pub fn rotated(self, k: usize) -> Self {
        let mut p = self;
        for _ in 0..k % 6 {
            p = LatticePoint::new(-p.j, p.i + p.j);
        }
        p
    }

    /// Reflection across the `a1` axis.
    pub fn reflected(self) -> Self {
        LatticePoint::new(self.i + self.j, -self.j)
    }

    /// Belongs to the honeycomb sublattice (one of three triangular
    /// sublattices removed).
    pub fn in_honeycomb(self) -> bool {
        (self.i - self.j).rem_euclid(3) != 0
    }

    /// Belongs to the kagome sublattice (one of four sites of the doubled
    /// cell removed).
    pub fn in_kagome(self) -> bool {
        !(self.i.rem_euclid(2) == 0 && self.j.rem_euclid(2) == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbors_are_at_unit_distance() {
        let o = LatticePoint::new(3, -2);
        for n in o.neighbors() {
            assert_eq!(o.dist2(n), 1);
            let (a, b) = (o.position(2.0), n.position(2.0));
            let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            assert!((d - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_and_reflection_preserve_distance() {
        let a = LatticePoint::new(2, 1);
        let b = LatticePoint::new(-1, 3);
        for k in 0..6 {
            assert_eq!(a.rotated(k).dist2(b.rotated(k)), a.dist2(b));
        }
        assert_eq!(a.rotated(6), a);
        assert_eq!(a.reflected().dist2(b.reflected()), a.dist2(b));
        assert_eq!(a.reflected().reflected(), a);
    }

    #[test]
    fn nearest_recovers_lattice_points() {
        for i in -3..3 {
            for j in -3..3 {
                let p = LatticePoint::new(i, j);
                let mut pos = p.position(5.0);
                pos[0] += 0.7;
                pos[1] -= 0.9;
                assert_eq!(LatticePoint::nearest(pos, 5.0), p);
            }
        }
    }

    #[test]
    fn sublattice_coordination() {
        // Honeycomb sites have three honeycomb neighbors; kagome sites four.
        let o = LatticePoint::new(1, 0);
        assert!(o.in_honeycomb() && o.in_kagome());
        assert_eq!(o.neighbors().filter(|n| n.in_honeycomb()).count(), 3);
        assert_eq!(o.neighbors().filter(|n| n.in_kagome()).count(), 4);
    }
}
