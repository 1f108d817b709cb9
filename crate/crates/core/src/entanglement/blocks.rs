use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numeric::UnionFind;

/// One connected diagonal block of a sparse symmetric matrix.
pub(crate) struct DenseBlock<K> {
    pub(crate) labels: Vec<K>,
    pub(crate) data: Vec<f64>,
}

/// Splits a sparse real matrix given as `((row, col), value)` triples into its
/// connected diagonal blocks, ordered by their smallest label. Fails when the
/// matrix departs from symmetry by more than `tol`.
pub(crate) fn symmetric_blocks<K: Ord + Copy>(entries: &[(K, K, f64)], tol: f64) -> Result<Vec<DenseBlock<K>>> {
    let mut index: BTreeMap<K, usize> = BTreeMap::new();
    for &(r, c, _) in entries {
        let n = index.len();
        index.entry(r).or_insert(n);
        let n = index.len();
        index.entry(c).or_insert(n);
    }
    let mut uf = UnionFind::new(index.len());
    let mut values: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for &(r, c, v) in entries {
        let (i, j) = (index[&r], index[&c]);
        uf.union(i, j);
        *values.entry((i, j)).or_insert(0.0) += v;
    }
    let mut worst: f64 = 0.0;
    for (&(i, j), &v) in &values {
        let t = values.get(&(j, i)).copied().unwrap_or(0.0);
        worst = worst.max((v - t).abs());
    }
    if worst > tol {
        return Err(Error::NotHermitian(worst));
    }

    // Group labels by component; BTreeMap iteration keeps labels sorted.
    let mut members: BTreeMap<usize, Vec<(K, usize)>> = BTreeMap::new();
    let mut first_label: BTreeMap<usize, K> = BTreeMap::new();
    for (&k, &i) in &index {
        let root = uf.find(i);
        members.entry(root).or_default().push((k, i));
        first_label.entry(root).or_insert(k);
    }
    let mut roots: Vec<usize> = members.keys().copied().collect();
    roots.sort_by(|x, y| first_label[x].cmp(&first_label[y]));

    let mut local = vec![usize::MAX; index.len()];
    let mut blocks = Vec::with_capacity(roots.len());
    for root in roots {
        let m = &members[&root];
        for (pos, &(_, i)) in m.iter().enumerate() {
            local[i] = pos;
        }
        blocks.push(DenseBlock {
            labels: m.iter().map(|(k, _)| *k).collect(),
            data: vec![0.0; m.len() * m.len()],
        });
    }
    let mut block_of = vec![0usize; index.len()];
    for (b, blk) in blocks.iter().enumerate() {
        for k in &blk.labels {
            block_of[index[k]] = b;
        }
    }
    for (&(i, j), &v) in &values {
        let blk = &mut blocks[block_of[i]];
        let n = blk.labels.len();
        // Symmetrize so the eigensolver sees an exactly symmetric matrix.
        let t = values.get(&(j, i)).copied().unwrap_or(0.0);
        blk.data[local[i] * n + local[j]] = 0.5 * (v + t);
    }
    Ok(blocks)
}
