use std::collections::HashMap;

use crate::canonical::big::split_big;
use crate::canonical::context::NodeContext;
use crate::canonical::small::partition_small;
use crate::connfn::ConnFn;
use crate::decomp::Decomposition;
use crate::error::{Error, Result};
use crate::f2linalg::VertexSet;
use crate::tangleset::{triple_covers, CoverPolicy};

/// Options for the node decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeOptions {
    pub covers: CoverPolicy,
    /// Cap on the complete tuples enumerated for one set of large order.
    pub tuple_cap: usize,
}

impl Default for NodeOptions {
    fn default() -> Self {
        NodeOptions { covers: CoverPolicy::default(), tuple_cap: crate::canonical::big::TUPLE_CAP }
    }
}

/// The decomposition of the contracted function at one node, as a directed
/// tree over `A↓` whose root has cone `A↓` and bag `{c0}`.
#[derive(Clone, Debug)]
pub struct NodeDecomposition {
    pub decomposition: Decomposition,
    pub root: usize,
    pub covers: usize,
    pub cap_event: bool,
    pub small_nodes: usize,
    pub big_nodes: usize,
}

enum Step {
    Small(Vec<VertexSet>),
    Big(Vec<(VertexSet, VertexSet)>),
}

struct Builder<'a> {
    ctx: &'a NodeContext,
    opts: NodeOptions,
    memo: HashMap<VertexSet, std::rc::Rc<Step>>,
    d: Decomposition,
    small_nodes: usize,
    big_nodes: usize,
}

impl Builder<'_> {
    fn step(&mut self, x: VertexSet) -> Result<std::rc::Rc<Step>> {
        if let Some(s) = self.memo.get(&x) {
            return Ok(s.clone());
        }
        let ctx = self.ctx;
        let step = if ctx.down().kappa(x) < ctx.bounds().small_threshold() {
            Step::Small(partition_small(ctx, x)?.parts)
        } else {
            Step::Big(split_big(ctx, x, self.opts.tuple_cap)?)
        };
        let step = std::rc::Rc::new(step);
        self.memo.insert(x, step.clone());
        Ok(step)
    }

    /// Expands the node `t` with cone `x` until all leaves are singletons.
    fn expand(&mut self, t: usize, x: VertexSet) -> Result<()> {
        if x.len() <= 1 {
            return Ok(());
        }
        match &*self.step(x)? {
            Step::Small(parts) => {
                self.small_nodes += 1;
                for &p in parts {
                    let c = self.d.add_node(p);
                    self.d.add_edge(t, c);
                    self.expand(c, p)?;
                }
            }
            Step::Big(splits) => {
                self.big_nodes += 1;
                for &(a, b) in splits {
                    let mid = self.d.add_node(x);
                    self.d.add_edge(t, mid);
                    for half in [a, b] {
                        let c = self.d.add_node(half);
                        self.d.add_edge(mid, c);
                        self.expand(c, half)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Decomposes the contracted function of a node context: below the root
/// (cone `A↓`), each triple cover `Q` of the tangle contributes a node with
/// cone `A↓ ∖ {c0}` whose child has cone `A↓ ∖ (Q∨ ∪ {c0})`; every set of
/// two or more elements is then split canonically until only singletons
/// remain.
pub fn decompose_node(ctx: &NodeContext, opts: NodeOptions) -> Result<NodeDecomposition> {
    let ground = ctx.ground();
    let c0 = VertexSet::singleton(ctx.c0());
    let fam = triple_covers(ctx.tangle(), ctx.support(), opts.covers);
    if fam.covers.is_empty() {
        return Err(Error::SearchCap { free: ctx.support().len(), cap: cover_cap(opts.covers) });
    }
    let mut b = Builder { ctx, opts, memo: HashMap::new(), d: Decomposition::new(ground), small_nodes: 0, big_nodes: 0 };
    let root = b.d.add_node(ground);
    for &q in &fam.covers {
        let s = b.d.add_node(ground - c0);
        b.d.add_edge(root, s);
        let x = ground - ctx.q_vee(q) - c0;
        let t = b.d.add_node(x);
        b.d.add_edge(s, t);
        b.expand(t, x)?;
    }
    Ok(NodeDecomposition {
        decomposition: b.d,
        root,
        covers: fam.covers.len(),
        cap_event: fam.cap_event,
        small_nodes: b.small_nodes,
        big_nodes: b.big_nodes,
    })
}

fn cover_cap(p: CoverPolicy) -> usize {
    match p {
        CoverPolicy::MinimumSize { cap } | CoverPolicy::UpToCap { cap } => cap,
    }
}
