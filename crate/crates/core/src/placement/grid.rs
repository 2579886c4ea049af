/// Uniform bucket grid over the periodic square `[0, L)^2`.
///
/// A disk is registered in every cell its bounding box touches, so a query
/// box only needs to visit the cells it overlaps.
pub(crate) struct SpatialGrid {
    size: f64,
    cells_per_side: usize,
    cell: f64,
    buckets: Vec<Vec<u32>>,
}

impl SpatialGrid {
    pub fn new(size: f64, cell_hint: f64) -> Self {
        let cells_per_side = ((size / cell_hint.max(1.0)).floor() as usize).max(1);
        Self {
            size,
            cells_per_side,
            cell: size / cells_per_side as f64,
            buckets: vec![Vec::new(); cells_per_side * cells_per_side],
        }
    }

    fn span(&self, lo: f64, hi: f64) -> impl Iterator<Item = usize> {
        let n = self.cells_per_side as i64;
        let (a, b) = ((lo / self.cell).floor() as i64, (hi / self.cell).floor() as i64);
        let (a, b) = if b - a + 1 >= n { (0, n - 1) } else { (a, b) };
        (a..=b).map(move |c| c.rem_euclid(n) as usize)
    }

    /// Cells overlapping the box of half-width `half` around `(x, y)`.
    fn cells(&self, x: f64, y: f64, half: f64) -> Vec<usize> {
        let n = self.cells_per_side;
        let xs: Vec<usize> = self.span(x - half, x + half).collect();
        self.span(y - half, y + half)
            .flat_map(|cy| xs.iter().map(move |&cx| cy * n + cx))
            .collect()
    }

    pub fn insert(&mut self, id: u32, x: f64, y: f64, radius: f64) {
        for c in self.cells(x, y, radius) {
            self.buckets[c].push(id);
        }
    }

    /// Calls `f` on every disk registered near the box (possibly more than
    /// once); stops early and returns false as soon as `f` does.
    pub fn all_near(&self, x: f64, y: f64, half: f64, mut f: impl FnMut(u32) -> bool) -> bool {
        debug_assert!(x >= 0.0 && x < self.size && y >= 0.0 && y < self.size);
        let n = self.cells_per_side;
        for cy in self.span(y - half, y + half) {
            for cx in self.span(x - half, x + half) {
                if !self.buckets[cy * n + cx].iter().all(|&id| f(id)) {
                    return false;
                }
            }
        }
        true
    }
}
