//! Uniform cell grid for fixed-radius neighbor search.
//!
//! Cells are cubes whose side equals the search radius, so every pair closer
//! than the radius lies in the same or an adjacent cell and a query scans at
//! most 3^d cells.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::types::Point;

type CellKey = [i64; 3];

#[derive(Debug, Clone)]
pub struct GridIndex {
    cell_size: f64,
    dim: usize,
    cells: HashMap<CellKey, Vec<usize>>,
}

impl GridIndex {
    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn occupied_cells(&self) -> usize {
        self.cells.len()
    }

    /// Site indices stored in the cell containing `p`.
    pub fn cell_members(&self, p: &Point) -> &[usize] {
        self.cells
            .get(&self.key(p))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    fn key(&self, p: &Point) -> CellKey {
        let mut k = [0i64; 3];
        for (a, slot) in k.iter_mut().enumerate().take(self.dim) {
            *slot = (p.coord(a) / self.cell_size).floor() as i64;
        }
        k
    }

    /// Calls `f(j, distance)` for every site `j` with `‖sites[j] − x‖ < radius`.
    ///
    /// `radius` must not exceed the cell size. Sites are visited cell by cell,
    /// so callers needing a fixed order must sort.
    pub fn for_each_within<F: FnMut(usize, f64)>(
        &self,
        sites: &[Point],
        x: &Point,
        radius: f64,
        mut f: F,
    ) {
        debug_assert!(radius <= self.cell_size);
        let center = self.key(x);
        let span = |a: usize| if a < self.dim { -1..=1 } else { 0..=0 };
        for dx in span(0) {
            for dy in span(1) {
                for dz in span(2) {
                    let key = [center[0] + dx, center[1] + dy, center[2] + dz];
                    let Some(members) = self.cells.get(&key) else {
                        continue;
                    };
                    for &j in members {
                        let d = x.distance(&sites[j]);
                        if d < radius {
                            f(j, d);
                        }
                    }
                }
            }
        }
    }

    /// All pairs `(i, j)`, `i < j`, closer than the cell size, sorted.
    pub fn neighbor_pairs(&self, sites: &[Point]) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for (i, p) in sites.iter().enumerate() {
            self.for_each_within(sites, p, self.cell_size, |j, _| {
                if i < j {
                    pairs.push((i, j));
                }
            });
        }
        pairs.sort_unstable();
        pairs
    }
}

/// Buckets `sites` into cells of side `radius`.
pub fn build_grid(sites: &[Point], radius: f64) -> Result<GridIndex> {
    if sites.is_empty() {
        return Err(Error::InvalidArgument("cannot grid an empty site list".into()));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "grid radius must be positive, got {radius}"
        )));
    }
    let dim = sites[0].dim();
    let mut grid = GridIndex {
        cell_size: radius,
        dim,
        cells: HashMap::new(),
    };
    for (i, p) in sites.iter().enumerate() {
        if p.dim() != dim {
            return Err(Error::InvalidArgument("sites have mixed dimensions".into()));
        }
        let key = grid.key(p);
        grid.cells.entry(key).or_default().push(i);
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force_pairs(sites: &[Point], radius: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..sites.len() {
            for j in i + 1..sites.len() {
                if sites[i].distance(&sites[j]) < radius {
                    out.push((i, j));
                }
            }
        }
        out
    }

    #[test]
    fn single_site() {
        let sites = [Point::new2(0.3, 0.7)];
        let g = build_grid(&sites, 0.1).unwrap();
        assert_eq!(g.occupied_cells(), 1);
        assert_eq!(g.cell_members(&sites[0]), &[0]);
    }

    #[test]
    fn far_pair_not_neighbors() {
        let sites = [Point::new2(0.1, 0.1), Point::new2(0.3, 0.1)];
        let g = build_grid(&sites, 0.1).unwrap();
        assert!(g.neighbor_pairs(&sites).is_empty());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_grid(&[], 0.1).is_err());
        assert!(build_grid(&[Point::new2(0.0, 0.0)], 0.0).is_err());
    }

    #[test]
    fn matches_all_pairs_2d_and_3d() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sites: Vec<Point> = (0..100)
            .map(|_| Point::new2(rng.random(), rng.random()))
            .collect();
        let g = build_grid(&sites, 0.1).unwrap();
        assert_eq!(g.neighbor_pairs(&sites), brute_force_pairs(&sites, 0.1));

        let sites: Vec<Point> = (0..300)
            .map(|_| Point::new3(rng.random(), rng.random(), rng.random()))
            .collect();
        let g = build_grid(&sites, 0.2).unwrap();
        assert_eq!(g.neighbor_pairs(&sites), brute_force_pairs(&sites, 0.2));
    }

    #[test]
    fn every_site_in_exactly_one_cell() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sites: Vec<Point> = (0..500)
            .map(|_| Point::new2(rng.random(), rng.random()))
            .collect();
        let g = build_grid(&sites, 0.07).unwrap();
        let mut seen: Vec<usize> = g.cells.values().flatten().copied().collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..500).collect::<Vec<_>>());
    }
}
