//! Partitions of world indices, represented by least-member representatives.

use crate::bits::Bits;

/// A partition of `0..n`. `rep[i]` is the smallest index in `i`'s block, so
/// two partitions are equal iff they induce the same blocks.
#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) struct Partition {
    rep: Vec<usize>,
}

impl Partition {
    pub(crate) fn identity(n: usize) -> Self {
        Partition { rep: (0..n).collect() }
    }

    /// Finest partition whose blocks merge every given pair (union-find, then
    /// canonicalized to least-member representatives).
    pub(crate) fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (x, y) in pairs {
            let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
            if rx != ry {
                // point the larger root at the smaller so roots stay minimal
                let (lo, hi) = if rx < ry { (rx, ry) } else { (ry, rx) };
                parent[hi] = lo;
            }
        }
        let rep = (0..n).map(|x| find(&mut parent, x)).collect();
        Partition { rep }
    }

    /// Build from block labels: `i` and `j` share a block iff `label[i] == label[j]`.
    pub(crate) fn from_labels<L: Ord>(labels: &[L]) -> Self {
        let n = labels.len();
        let mut rep = vec![usize::MAX; n];
        for i in 0..n {
            if rep[i] != usize::MAX {
                continue;
            }
            rep[i] = i;
            for j in i + 1..n {
                if rep[j] == usize::MAX && labels[j] == labels[i] {
                    rep[j] = i;
                }
            }
        }
        Partition { rep }
    }

    pub(crate) fn rep_of(&self, i: usize) -> usize {
        self.rep[i]
    }

    pub(crate) fn same(&self, i: usize, j: usize) -> bool {
        self.rep[i] == self.rep[j]
    }

    pub(crate) fn count(&self) -> usize {
        self.rep.iter().enumerate().filter(|(i, r)| i == *r as &usize).count()
    }

    /// Blocks in ascending order of their least member.
    pub(crate) fn blocks(&self) -> Vec<Bits> {
        let n = self.rep.len();
        let mut out: Vec<(usize, Bits)> = Vec::new();
        for i in 0..n {
            let r = self.rep[i];
            match out.iter_mut().find(|(root, _)| *root == r) {
                Some((_, b)) => b.set(i),
                None => {
                    let mut b = Bits::new(n);
                    b.set(i);
                    out.push((r, b));
                }
            }
        }
        out.sort_by_key(|(root, _)| *root);
        out.into_iter().map(|(_, b)| b).collect()
    }

    /// Block of `i` as a bitset.
    pub(crate) fn block_of(&self, i: usize) -> Bits {
        let n = self.rep.len();
        let mut b = Bits::new(n);
        let r = self.rep[i];
        for j in 0..n {
            if self.rep[j] == r {
                b.set(j);
            }
        }
        b
    }

    /// True iff every block of `self` is contained in a block of `other`.
    pub(crate) fn refines(&self, other: &Partition) -> bool {
        assert_eq!(self.rep.len(), other.rep.len());
        (0..self.rep.len()).all(|i| other.same(i, self.rep[i]))
    }

    /// Pairs `(i, j)` with `i < j` in the same block.
    pub(crate) fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.rep.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.rep[i] == self.rep[j] {
                    out.push((i, j));
                }
            }
        }
        out
    }
}
