use std::cmp::Ordering;
use std::collections::BinaryHeap;

const FIELD: u32 = u32::MAX;

/// A candidate term in the max-priority queue: a field on cluster `a`, or a
/// bond between clusters `a < b`. Values are logarithms of the coupling.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Term {
    pub log_value: f64,
    pub a: u32,
    pub b: u32,
}

impl Term {
    pub fn field(cluster: u32, log_value: f64) -> Self {
        Self {
            log_value,
            a: cluster,
            b: FIELD,
        }
    }

    pub fn bond(x: u32, y: u32, log_value: f64) -> Self {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        Self { log_value, a, b }
    }

    pub fn is_field(&self) -> bool {
        self.b == FIELD
    }
}

// Larger value first; on ties bonds before fields, then the lexicographically
// smallest cluster pair.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.log_value
            .total_cmp(&other.log_value)
            .then_with(|| other.is_field().cmp(&self.is_field()))
            .then_with(|| (other.a, other.b).cmp(&(self.a, self.b)))
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Term {}

/// Max-heap of terms with lazy deletion: entries are never removed when the
/// underlying term changes, the caller discards stale ones on pop.
#[derive(Default)]
pub(crate) struct TermHeap {
    heap: BinaryHeap<Term>,
}

impl TermHeap {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            heap: BinaryHeap::with_capacity(n),
        }
    }

    pub fn push(&mut self, t: Term) {
        self.heap.push(t);
    }

    pub fn pop(&mut self) -> Option<Term> {
        self.heap.pop()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_prefers_value_then_bonds_then_low_ids() {
        let mut h = TermHeap::default();
        h.push(Term::field(0, 0.5));
        h.push(Term::bond(3, 1, 0.5));
        h.push(Term::bond(0, 2, 0.5));
        h.push(Term::field(9, 0.7));
        h.push(Term::bond(4, 5, -1.0));
        let order: Vec<(u32, u32)> = std::iter::from_fn(|| h.pop()).map(|t| (t.a, t.b)).collect();
        assert_eq!(order, vec![(9, FIELD), (0, 2), (1, 3), (0, FIELD), (4, 5)]);
    }
}
