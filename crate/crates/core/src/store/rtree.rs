//! Static R-tree over bounding boxes, bulk loaded with Sort-Tile-Recursive
//! packing. The store rebuilds it wholesale whenever its contents change.

use crate::geometry::BBox;

pub const MAX_ENTRIES: usize = 16;

#[derive(Debug, Clone)]
enum Node {
    Leaf { bbox: BBox, items: Vec<(BBox, usize)> },
    Inner { bbox: BBox, children: Vec<usize> },
}

impl Node {
    fn bbox(&self) -> &BBox {
        match self {
            Node::Leaf { bbox, .. } | Node::Inner { bbox, .. } => bbox,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RTree {
    nodes: Vec<Node>,
    root: Option<usize>,
    len: usize,
}

impl RTree {
    /// Packs `(bbox, payload)` pairs; payloads are returned by queries.
    pub fn bulk_load(items: Vec<(BBox, usize)>) -> Self {
        let len = items.len();
        if items.is_empty() {
            return RTree::default();
        }
        let mut nodes = Vec::new();
        let mut level: Vec<usize> = str_pack(items, |(bb, _)| *bb)
            .into_iter()
            .map(|chunk| {
                let bbox = chunk.iter().fold(BBox::empty(), |acc, (bb, _)| acc.union(bb));
                nodes.push(Node::Leaf { bbox, items: chunk });
                nodes.len() - 1
            })
            .collect();
        while level.len() > 1 {
            let entries: Vec<(BBox, usize)> = level.iter().map(|&i| (*nodes[i].bbox(), i)).collect();
            level = str_pack(entries, |(bb, _)| *bb)
                .into_iter()
                .map(|chunk| {
                    let bbox = chunk.iter().fold(BBox::empty(), |acc, (bb, _)| acc.union(bb));
                    let children = chunk.into_iter().map(|(_, i)| i).collect();
                    nodes.push(Node::Inner { bbox, children });
                    nodes.len() - 1
                })
                .collect();
        }
        RTree {
            root: level.first().copied(),
            nodes,
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Payloads whose box intersects `query`, in no particular order.
    pub fn query(&self, query: &BBox, out: &mut Vec<usize>) {
        let Some(root) = self.root else { return };
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            match &self.nodes[i] {
                Node::Leaf { bbox, items } => {
                    if bbox.intersects(query) {
                        out.extend(items.iter().filter(|(bb, _)| bb.intersects(query)).map(|(_, p)| *p));
                    }
                }
                Node::Inner { bbox, children } => {
                    if bbox.intersects(query) {
                        stack.extend(children.iter().copied());
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        let mut depth = 0;
        let mut cur = self.root;
        while let Some(i) = cur {
            depth += 1;
            cur = match &self.nodes[i] {
                Node::Inner { children, .. } => children.first().copied(),
                Node::Leaf { .. } => None,
            };
        }
        depth
    }
}

fn str_pack<T>(mut items: Vec<T>, bbox_of: impl Fn(&T) -> BBox) -> Vec<Vec<T>> {
    let leaf_count = items.len().div_ceil(MAX_ENTRIES);
    let slabs = (leaf_count as f64).sqrt().ceil().max(1.0) as usize;
    let per_slab = slabs * MAX_ENTRIES;
    let key = |bb: BBox| bb.center();
    items.sort_by(|a, b| key(bbox_of(a)).0.total_cmp(&key(bbox_of(b)).0));
    let mut out = Vec::with_capacity(leaf_count);
    let mut rest = items;
    while !rest.is_empty() {
        let tail = rest.split_off(per_slab.min(rest.len()));
        let mut slab = rest;
        rest = tail;
        slab.sort_by(|a, b| key(bbox_of(a)).1.total_cmp(&key(bbox_of(b)).1));
        let mut slab_rest = slab;
        while !slab_rest.is_empty() {
            let tail = slab_rest.split_off(MAX_ENTRIES.min(slab_rest.len()));
            out.push(slab_rest);
            slab_rest = tail;
        }
    }
    out
}
