use std::collections::{BTreeMap, BTreeSet};

use super::{JoinGraph, Slot};

/// Isomorphism-invariant encoding of a join graph's closure.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey {
    /// Relation per canonical node position.
    pub relations: Vec<String>,
    /// Join classes over canonical positions: `(0, node, attr)` for
    /// attributes, `(1, head position, 0)` for head slots.
    pub classes: Vec<Vec<(u8, usize, usize)>>,
}

impl CanonicalKey {
    /// Number of attribute slots taking part in some join or projection.
    pub fn bound_slots(&self) -> usize {
        self.classes.iter().map(|c| c.iter().filter(|s| s.0 == 0).count()).sum()
    }
}

pub(super) fn classes(g: &JoinGraph) -> Vec<BTreeSet<Slot>> {
    let mut index: BTreeMap<Slot, usize> = BTreeMap::new();
    let mut slots = Vec::new();
    for (u, n) in g.nodes.iter().enumerate() {
        for i in 0..n.arity {
            index.insert(Slot::Attr(u, i), slots.len());
            slots.push(Slot::Attr(u, i));
        }
    }
    for p in 0..g.head_arity {
        index.insert(Slot::Head(p), slots.len());
        slots.push(Slot::Head(p));
    }
    let mut parent: Vec<usize> = (0..slots.len()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    let union = |a: usize, b: usize, parent: &mut Vec<usize>| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    };
    for (u, i, v, j) in g.join_pairs() {
        union(index[&Slot::Attr(u, i)], index[&Slot::Attr(v, j)], &mut parent);
    }
    for (u, n) in g.nodes.iter().enumerate() {
        for &(i, p) in &n.projections {
            union(index[&Slot::Attr(u, i)], index[&Slot::Head(p)], &mut parent);
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<Slot>> = BTreeMap::new();
    for (k, s) in slots.iter().enumerate() {
        let r = find(&mut parent, k);
        groups.entry(r).or_default().insert(*s);
    }
    groups.into_values().filter(|c| c.len() > 1).collect()
}

pub(super) fn canonical_key(g: &JoinGraph) -> CanonicalKey {
    let classes = classes(g);

    // Per-node invariant: for each attribute, the (relation, attr) / head
    // labels of the other members of its class.
    let mut class_of: BTreeMap<Slot, usize> = BTreeMap::new();
    for (ci, c) in classes.iter().enumerate() {
        for s in c {
            class_of.insert(*s, ci);
        }
    }
    let label = |s: &Slot| -> (u8, String, usize) {
        match *s {
            Slot::Attr(u, i) => (0, g.nodes[u].relation.clone(), i),
            Slot::Head(p) => (1, String::new(), p),
        }
    };
    let signature = |u: usize| -> Vec<(usize, Vec<(u8, String, usize)>)> {
        (0..g.nodes[u].arity)
            .filter_map(|i| {
                let ci = class_of.get(&Slot::Attr(u, i))?;
                let mut others: Vec<_> = classes[*ci]
                    .iter()
                    .filter(|s| **s != Slot::Attr(u, i))
                    .map(label)
                    .collect();
                others.sort();
                Some((i, others))
            })
            .collect()
    };

    let mut order: Vec<(String, Vec<(usize, Vec<(u8, String, usize)>)>, usize)> = (0..g.nodes.len())
        .map(|u| (g.nodes[u].relation.clone(), signature(u), u))
        .collect();
    order.sort();
    // Blocks of nodes indistinguishable by relation and signature.
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (k, entry) in order.iter().enumerate() {
        if k > 0 && order[k - 1].0 == entry.0 && order[k - 1].1 == entry.1 {
            blocks.last_mut().unwrap().push(entry.2);
        } else {
            blocks.push(vec![entry.2]);
        }
    }
    let relations: Vec<String> = order.iter().map(|e| e.0.clone()).collect();

    let encode = |pos_of: &[usize]| -> Vec<Vec<(u8, usize, usize)>> {
        let mut out: Vec<Vec<(u8, usize, usize)>> = classes
            .iter()
            .map(|c| {
                let mut v: Vec<(u8, usize, usize)> = c
                    .iter()
                    .map(|s| match *s {
                        Slot::Attr(u, i) => (0, pos_of[u], i),
                        Slot::Head(p) => (1, p, 0),
                    })
                    .collect();
                v.sort_unstable();
                v
            })
            .collect();
        out.sort_unstable();
        out
    };

    let mut best: Option<Vec<Vec<(u8, usize, usize)>>> = None;
    let mut pos_of = vec![0; g.nodes.len()];
    let mut arrangement: Vec<Vec<usize>> = blocks.clone();
    permute_blocks(&mut arrangement, 0, &mut |arr| {
        let mut p = 0;
        for block in arr {
            for &u in block {
                pos_of[u] = p;
                p += 1;
            }
        }
        let enc = encode(&pos_of);
        if best.as_ref().is_none_or(|b| enc < *b) {
            best = Some(enc);
        }
    });
    CanonicalKey {
        relations,
        classes: best.unwrap_or_default(),
    }
}

/// Visits every combination of permutations of the blocks.
fn permute_blocks(blocks: &mut [Vec<usize>], k: usize, visit: &mut dyn FnMut(&[Vec<usize>])) {
    if k == blocks.len() {
        visit(blocks);
        return;
    }
    let n = blocks[k].len();
    if n == 1 {
        permute_blocks(blocks, k + 1, visit);
        return;
    }
    // Heap's algorithm over block k.
    let mut c = vec![0usize; n];
    permute_blocks(blocks, k + 1, visit);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                blocks[k].swap(0, i);
            } else {
                blocks[k].swap(c[i], i);
            }
            permute_blocks(blocks, k + 1, visit);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heap_visits_all_permutations() {
        let mut blocks = vec![vec![0, 1, 2], vec![3, 4]];
        let mut seen = BTreeSet::new();
        permute_blocks(&mut blocks, 0, &mut |b| {
            seen.insert(b.to_vec());
        });
        assert_eq!(seen.len(), 12);
    }
}
