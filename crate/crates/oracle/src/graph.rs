//! Invariant part of a finite digraph by its definition: a vertex is invariant
//! iff it admits arbitrarily long forward and backward walks inside the set.

use std::collections::{BTreeMap, BTreeSet};

pub fn invariant_part(edges: &BTreeMap<u64, Vec<u64>>, n: &BTreeSet<u64>) -> BTreeSet<u64> {
    let len = n.len() + 1;
    // fwd[v]: a forward walk of length k exists from v within n
    let mut fwd: BTreeSet<u64> = n.clone();
    for _ in 0..len {
        fwd = n
            .iter()
            .copied()
            .filter(|v| edges.get(v).map_or(false, |out| out.iter().any(|w| fwd.contains(w))))
            .collect();
    }
    let mut bwd: BTreeSet<u64> = n.clone();
    for _ in 0..len {
        let mut next = BTreeSet::new();
        for v in n {
            if !bwd.contains(v) {
                continue;
            }
            if let Some(out) = edges.get(v) {
                for w in out {
                    if n.contains(w) {
                        next.insert(*w);
                    }
                }
            }
        }
        bwd = next;
    }
    fwd.intersection(&bwd).copied().collect()
}
