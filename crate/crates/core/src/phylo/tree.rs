use super::PhyloError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub id: u64,
    /// Index of the parent in the owning tree.
    pub parent: Option<usize>,
    /// Generation (rank) at which this node's lineage originates.
    pub origin_time: u64,
    pub taxon_label: Option<String>,
    pub founder_tag: Option<u16>,
}

/// A rooted tree, or a forest of them, stored as an arena.
///
/// Nodes are appended parent-first, so every node's parent has a smaller
/// index and the arena order is a valid topological order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhyloTree {
    nodes: Vec<Node>,
    children: Vec<Vec<usize>>,
}

impl PhyloTree {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a node with `id` equal to its index.
    pub fn add_node(
        &mut self,
        parent: Option<usize>,
        origin_time: u64,
        taxon_label: Option<String>,
        founder_tag: Option<u16>,
    ) -> Result<usize, PhyloError> {
        let id = self.nodes.len() as u64;
        self.add_node_with_id(id, parent, origin_time, taxon_label, founder_tag)
    }

    pub fn add_node_with_id(
        &mut self,
        id: u64,
        parent: Option<usize>,
        origin_time: u64,
        taxon_label: Option<String>,
        founder_tag: Option<u16>,
    ) -> Result<usize, PhyloError> {
        let index = self.nodes.len();
        if let Some(p) = parent {
            let parent_node = self
                .nodes
                .get(p)
                .ok_or(PhyloError::UnknownParent(p as u64))?;
            if origin_time < parent_node.origin_time {
                return Err(PhyloError::TimeReversal {
                    child: id,
                    parent: parent_node.id,
                });
            }
            self.children[p].push(index);
        }
        self.nodes.push(Node {
            id,
            parent,
            origin_time,
            taxon_label,
            founder_tag,
        });
        self.children.push(Vec::new());
        Ok(index)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, index: usize) -> &Node {
        &self.nodes[index]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn children(&self, index: usize) -> &[usize] {
        &self.children[index]
    }

    pub fn parent(&self, index: usize) -> Option<usize> {
        self.nodes[index].parent
    }

    pub fn is_leaf(&self, index: usize) -> bool {
        self.children[index].is_empty()
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.nodes[i].parent.is_none())
            .collect()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_leaf(i)).collect()
    }

    /// Edge length above `index`; zero for roots.
    pub fn branch_length(&self, index: usize) -> u64 {
        match self.nodes[index].parent {
            Some(p) => self.nodes[index].origin_time - self.nodes[p].origin_time,
            None => 0,
        }
    }

    /// Depth in edges from the node's own root.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.len()];
        for i in 0..self.len() {
            if let Some(p) = self.nodes[i].parent {
                depth[i] = depth[p] + 1;
            }
        }
        depth
    }

    pub fn max_depth(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0)
    }

    /// Number of leaves at or below each node.
    pub fn leaf_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.len()];
        for i in (0..self.len()).rev() {
            if self.is_leaf(i) {
                counts[i] = 1;
            }
            if let Some(p) = self.nodes[i].parent {
                counts[p] += counts[i];
            }
        }
        counts
    }

    /// Preorder traversal of the whole forest, roots in index order,
    /// children in insertion order.
    pub fn preorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.len());
        let mut stack: Vec<usize> = self.roots().into_iter().rev().collect();
        while let Some(i) = stack.pop() {
            order.push(i);
            stack.extend(self.children[i].iter().rev());
        }
        order
    }

    /// Copy with nodes renumbered in preorder and ids equal to indices.
    pub fn normalized(&self) -> PhyloTree {
        self.rebuild(|_| true)
    }

    /// Removes every unlabeled node with exactly one child, reattaching the
    /// child to the removed node's parent. A unifurcating root is replaced by
    /// its child, so the deepest node of each collapsed chain survives.
    pub fn collapse_unifurcations(&self) -> PhyloTree {
        self.rebuild(|(tree, i)| {
            !(tree.children[i].len() == 1 && tree.nodes[i].taxon_label.is_none())
        })
    }

    /// Joins all roots under a new root at origin time 0. Trees with a
    /// single root are returned unchanged.
    pub fn stitched(&self) -> PhyloTree {
        let roots = self.roots();
        if roots.len() <= 1 {
            return self.clone();
        }
        let mut out = PhyloTree::new();
        out.add_node(None, 0, None, None).unwrap();
        let mut map = vec![usize::MAX; self.len()];
        for i in self.preorder() {
            let parent = self.nodes[i].parent.map(|p| map[p]).or(Some(0));
            let n = &self.nodes[i];
            map[i] = out
                .add_node(parent, n.origin_time, n.taxon_label.clone(), n.founder_tag)
                .unwrap();
        }
        out
    }

    fn rebuild(&self, keep: impl Fn((&PhyloTree, usize)) -> bool) -> PhyloTree {
        let mut out = PhyloTree::new();
        let mut map: Vec<Option<usize>> = vec![None; self.len()];
        for i in self.preorder() {
            // Nearest kept ancestor.
            let mut parent = self.nodes[i].parent;
            while let Some(p) = parent {
                if map[p].is_some() {
                    break;
                }
                parent = self.nodes[p].parent;
            }
            if !keep((self, i)) {
                continue;
            }
            let n = &self.nodes[i];
            map[i] = Some(
                out.add_node(
                    parent.and_then(|p| map[p]),
                    n.origin_time,
                    n.taxon_label.clone(),
                    n.founder_tag,
                )
                .expect("origin times are monotone along ancestry"),
            );
        }
        out
    }

    /// Canonical string of the unlabeled shape with origin times, invariant
    /// to child and root order.
    pub fn shape_signature(&self) -> String {
        fn sig(t: &PhyloTree, i: usize) -> String {
            let mut parts: Vec<String> = t.children[i].iter().map(|&c| sig(t, c)).collect();
            parts.sort();
            format!("({}){}", parts.join(","), t.nodes[i].origin_time)
        }
        let mut roots: Vec<String> = self.roots().into_iter().map(|r| sig(self, r)).collect();
        roots.sort();
        roots.join(";")
    }

    /// Leaf index for each taxon label. Errors on duplicate labels.
    pub fn leaf_labels(&self) -> Result<std::collections::BTreeMap<String, usize>, PhyloError> {
        let mut map = std::collections::BTreeMap::new();
        for i in self.leaves() {
            let label = self.nodes[i]
                .taxon_label
                .clone()
                .unwrap_or_else(|| format!("#{}", self.nodes[i].id));
            if map.insert(label.clone(), i).is_some() {
                return Err(PhyloError::DuplicateLabel(label));
            }
        }
        Ok(map)
    }
}
