use std::collections::{HashMap, HashSet};

use crate::phylo::PhyloTree;

/// One birth. Every birth makes exactly one deposit and `generation` is its
/// rank; founders have deposited nothing and sit at 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineageRecord {
    pub parent: Option<u64>,
    pub generation: u64,
    pub pe: u32,
    pub founder_tag: Option<u16>,
    /// Differentia deposited at this birth. Empty unless deposit tracking is
    /// on.
    pub deposits: Vec<u64>,
}

/// Perfect-fidelity ancestry of every genome in a simulation.
#[derive(Clone, Debug, Default)]
pub struct Tracker {
    records: HashMap<u64, LineageRecord>,
    keep_deposits: bool,
}

impl Tracker {
    pub fn new(keep_deposits: bool) -> Self {
        Self {
            records: HashMap::new(),
            keep_deposits,
        }
    }

    pub fn keeps_deposits(&self) -> bool {
        self.keep_deposits
    }

    pub fn record_birth(&mut self, id: u64, record: LineageRecord) {
        let previous = self.records.insert(id, record);
        debug_assert!(previous.is_none(), "id {id} reused");
    }

    pub fn add_deposit(&mut self, id: u64, value: u64) {
        if self.keep_deposits {
            if let Some(r) = self.records.get_mut(&id) {
                r.deposits.push(value);
            }
        }
    }

    pub fn get(&self, id: u64) -> Option<&LineageRecord> {
        self.records.get(&id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Ids from `id` back to its founder, inclusive, youngest first.
    pub fn lineage(&self, id: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut at = Some(id);
        while let Some(i) = at {
            out.push(i);
            at = self.records.get(&i).and_then(|r| r.parent);
        }
        out
    }

    /// Every deposit along the lineage of `id`, oldest first.
    pub fn deposit_history(&self, id: u64) -> Vec<u64> {
        let mut out = Vec::new();
        for i in self.lineage(id).into_iter().rev() {
            if let Some(r) = self.records.get(&i) {
                out.extend_from_slice(&r.deposits);
            }
        }
        out
    }

    /// Drops every record that is not an ancestor of (or equal to) a live id.
    pub fn prune_extinct(&mut self, live: impl IntoIterator<Item = u64>) -> usize {
        let mut keep: HashSet<u64> = HashSet::with_capacity(self.records.len() / 2);
        for id in live {
            let mut at = Some(id);
            while let Some(i) = at {
                if !keep.insert(i) {
                    break;
                }
                at = self.records.get(&i).and_then(|r| r.parent);
            }
        }
        let before = self.records.len();
        self.records.retain(|id, _| keep.contains(id));
        before - self.records.len()
    }

    /// Ancestry of `leaves` as a tree with unifurcations removed. Each
    /// `(id, label)` becomes a labelled leaf; inner nodes are the births at
    /// which sampled lineages split, timed by birth generation. Lineages from
    /// different founders stay separate roots.
    pub fn to_tree(&self, leaves: &[(u64, String)]) -> PhyloTree {
        let mut children: HashMap<u64, Vec<u64>> = HashMap::new();
        let mut roots = Vec::new();
        let mut seen = HashSet::new();
        for (id, _) in leaves {
            let mut child = *id;
            if !seen.insert(child) {
                continue;
            }
            loop {
                match self.records.get(&child).and_then(|r| r.parent) {
                    Some(p) => {
                        children.entry(p).or_default().push(child);
                        if !seen.insert(p) {
                            break;
                        }
                        child = p;
                    }
                    None => {
                        roots.push(child);
                        break;
                    }
                }
            }
        }
        let labels: HashMap<u64, &str> = leaves.iter().map(|(id, l)| (*id, l.as_str())).collect();
        let mut tree = PhyloTree::new();
        let mut stack: Vec<(u64, Option<usize>)> = roots.iter().rev().map(|&r| (r, None)).collect();
        while let Some((id, parent)) = stack.pop() {
            let record = self.records.get(&id);
            let index = tree
                .add_node_with_id(
                    id,
                    parent,
                    record.map_or(0, |r| r.generation),
                    labels.get(&id).map(|l| l.to_string()),
                    record.and_then(|r| r.founder_tag),
                )
                .expect("birth generations are monotone along a lineage");
            if let Some(kids) = children.get(&id) {
                for &c in kids.iter().rev() {
                    stack.push((c, Some(index)));
                }
            }
        }
        tree.collapse_unifurcations()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(parent: Option<u64>, generation: u64) -> LineageRecord {
        LineageRecord {
            parent,
            generation,
            pe: 0,
            founder_tag: None,
            deposits: Vec::new(),
        }
    }

    #[test]
    fn siblings_meet_at_parent_birth() {
        let mut t = Tracker::new(false);
        t.record_birth(1, rec(None, 0));
        t.record_birth(2, rec(Some(1), 0));
        t.record_birth(3, rec(Some(2), 5));
        t.record_birth(4, rec(Some(3), 6));
        t.record_birth(5, rec(Some(3), 6));
        let tree = t.to_tree(&[(4, "a".into()), (5, "b".into())]);
        assert_eq!(tree.len(), 3);
        assert_eq!(tree.node(0).origin_time, 5);
        assert_eq!(tree.leaves().len(), 2);
    }

    #[test]
    fn founders_alone_form_a_forest() {
        let mut t = Tracker::new(false);
        t.record_birth(1, rec(None, 0));
        t.record_birth(2, rec(None, 0));
        let tree = t.to_tree(&[(1, "x".into()), (2, "y".into())]);
        assert_eq!(tree.roots().len(), 2);
    }

    #[test]
    fn pruning_keeps_only_live_ancestry() {
        let mut t = Tracker::new(false);
        t.record_birth(1, rec(None, 0));
        t.record_birth(2, rec(Some(1), 0));
        t.record_birth(3, rec(Some(1), 0));
        t.record_birth(4, rec(Some(2), 1));
        assert_eq!(t.prune_extinct([4]), 1);
        assert!(t.get(3).is_none());
        assert_eq!(t.lineage(4), vec![4, 2, 1]);
    }

    #[test]
    fn deposit_history_is_oldest_first() {
        let mut t = Tracker::new(true);
        t.record_birth(1, rec(None, 0));
        t.record_birth(2, rec(Some(1), 0));
        t.add_deposit(2, 7);
        t.record_birth(3, rec(Some(2), 1));
        t.add_deposit(3, 8);
        t.add_deposit(3, 9);
        assert_eq!(t.deposit_history(3), vec![7, 8, 9]);
    }
}
