use rand::Rng;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Deterministic depth-`T` policy: one action per observation history.
///
/// `children` holds one subtree per observation and is empty at the last
/// step. Branches that cannot be reached under the planning belief carry
/// `reachable == false` and the default action 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolicyTree {
    pub action: usize,
    pub reachable: bool,
    pub children: Vec<PolicyTree>,
}

impl PolicyTree {
    pub fn leaf(action: usize) -> Self {
        Self { action, reachable: true, children: Vec::new() }
    }

    /// Open-loop tree that plays `action` at every node.
    pub fn constant(action: usize, depth: usize, n_obs: usize) -> Self {
        assert!(depth >= 1);
        let children = if depth == 1 {
            Vec::new()
        } else {
            vec![Self::constant(action, depth - 1, n_obs); n_obs]
        };
        Self { action, reachable: true, children }
    }

    /// Open-loop tree whose step-`t` action is `actions[t]`.
    pub fn open_loop(actions: &[usize], n_obs: usize) -> Self {
        assert!(!actions.is_empty());
        let children = if actions.len() == 1 {
            Vec::new()
        } else {
            vec![Self::open_loop(&actions[1..], n_obs); n_obs]
        };
        Self { action: actions[0], reachable: true, children }
    }

    /// The placeholder used for unreachable branches.
    pub fn unreachable(depth: usize, n_obs: usize) -> Self {
        let mut t = Self::constant(0, depth, n_obs);
        t.mark_unreachable();
        t
    }

    fn mark_unreachable(&mut self) {
        self.reachable = false;
        for c in &mut self.children {
            c.mark_unreachable();
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children.first().map_or(0, |c| c.depth())
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(|c| c.node_count()).sum::<usize>()
    }

    /// Every internal node has exactly `n_obs` children and all leaves sit
    /// at the same depth.
    pub fn is_complete(&self, n_obs: usize) -> bool {
        fn walk(t: &PolicyTree, n_obs: usize, depth: usize) -> bool {
            if depth == 1 {
                t.children.is_empty()
            } else {
                t.children.len() == n_obs && t.children.iter().all(|c| walk(c, n_obs, depth - 1))
            }
        }
        walk(self, n_obs, self.depth())
    }

    pub fn subtree(&self, history: &[usize]) -> Option<&PolicyTree> {
        match history.split_first() {
            None => Some(self),
            Some((&o, rest)) => self.children.get(o)?.subtree(rest),
        }
    }

    pub fn act(&self, history: &[usize]) -> Option<usize> {
        self.subtree(history).map(|t| t.action)
    }

    /// Same actions at every node, ignoring reachability marks.
    pub fn same_behavior(&self, other: &PolicyTree) -> bool {
        self.action == other.action
            && self.children.len() == other.children.len()
            && self.children.iter().zip(&other.children).all(|(a, b)| a.same_behavior(b))
    }

    /// Copy with all reachability marks cleared.
    pub fn normalized(&self) -> PolicyTree {
        PolicyTree {
            action: self.action,
            reachable: true,
            children: self.children.iter().map(|c| c.normalized()).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, n_actions: usize, n_obs: usize, depth: usize) -> Self {
        let action = rng.gen_range(0..n_actions);
        let children = if depth <= 1 {
            Vec::new()
        } else {
            (0..n_obs).map(|_| Self::random(rng, n_actions, n_obs, depth - 1)).collect()
        };
        Self { action, reachable: true, children }
    }

    /// Number of nodes of a complete tree.
    pub fn complete_node_count(n_obs: usize, depth: usize) -> usize {
        (0..depth).map(|t| n_obs.pow(t as u32)).sum()
    }

    /// Number of distinct complete trees, `|A|^(sum_t |O|^t)`, as a float.
    pub fn count(n_actions: usize, n_obs: usize, depth: usize) -> f64 {
        (n_actions as f64).powi(Self::complete_node_count(n_obs, depth) as i32)
    }

    /// Tree number `index` in the mixed-radix enumeration over nodes in
    /// breadth-first order, root most significant.
    pub fn from_index(mut index: u64, n_actions: usize, n_obs: usize, depth: usize) -> Self {
        let nodes = Self::complete_node_count(n_obs, depth);
        let mut actions = vec![0usize; nodes];
        for slot in actions.iter_mut().rev() {
            *slot = (index % n_actions as u64) as usize;
            index /= n_actions as u64;
        }
        Self::from_bfs_actions(&actions, n_obs, depth)
    }

    /// Builds a complete tree from actions listed in breadth-first order.
    pub fn from_bfs_actions(actions: &[usize], n_obs: usize, depth: usize) -> Self {
        fn build(actions: &[usize], n_obs: usize, depth: usize, t: usize, pos: usize) -> PolicyTree {
            // `pos` is the offset of the node within its level.
            let level_start: usize = (0..t).map(|k| n_obs.pow(k as u32)).sum();
            let action = actions[level_start + pos];
            let children = if t + 1 == depth {
                Vec::new()
            } else {
                (0..n_obs).map(|o| build(actions, n_obs, depth, t + 1, pos * n_obs + o)).collect()
            };
            PolicyTree { action, reachable: true, children }
        }
        build(actions, n_obs, depth, 0, 0)
    }

    /// Actions in breadth-first order.
    pub fn bfs_actions(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut level = vec![self];
        while !level.is_empty() {
            out.extend(level.iter().map(|t| t.action));
            level = level.iter().flat_map(|t| t.children.iter()).collect();
        }
        out
    }

    /// Array form; `n_obs` is needed because depth-1 trees carry no
    /// children to infer it from.
    pub fn flatten(&self, n_obs: usize) -> FlatPolicy {
        FlatPolicy::new(self, n_obs)
    }

    /// Serializes to nested `{action, children}` records keyed by labels.
    pub fn to_json(&self, actions: &[String], observations: &[String]) -> Value {
        let mut obj = Map::new();
        obj.insert("action".into(), Value::String(actions[self.action].clone()));
        if !self.reachable {
            obj.insert("unreachable".into(), Value::Bool(true));
        }
        if !self.children.is_empty() {
            let children = self
                .children
                .iter()
                .enumerate()
                .map(|(o, c)| (observations[o].clone(), c.to_json(actions, observations)))
                .collect();
            obj.insert("children".into(), Value::Object(children));
        }
        Value::Object(obj)
    }

    pub fn from_json(value: &Value, actions: &[String], observations: &[String]) -> Result<Self> {
        let obj = value.as_object().ok_or_else(|| Error::Format("node is not an object".into()))?;
        let label = obj
            .get("action")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Format("node without an action".into()))?;
        let action = actions
            .iter()
            .position(|a| a == label)
            .ok_or_else(|| Error::Format(format!("unknown action `{label}`")))?;
        let reachable = !obj.get("unreachable").and_then(Value::as_bool).unwrap_or(false);
        let children = match obj.get("children") {
            None => Vec::new(),
            Some(Value::Object(map)) => {
                if map.len() != observations.len() {
                    return Err(Error::Format("node must have one child per observation".into()));
                }
                observations
                    .iter()
                    .map(|o| {
                        let child = map
                            .get(o)
                            .ok_or_else(|| Error::Format(format!("missing child for `{o}`")))?;
                        Self::from_json(child, actions, observations)
                    })
                    .collect::<Result<_>>()?
            }
            Some(_) => return Err(Error::Format("children must be an object".into())),
        };
        let tree = Self { action, reachable, children };
        if !tree.children.is_empty() {
            let d = tree.children[0].depth();
            if tree.children.iter().any(|c| c.depth() != d) {
                return Err(Error::Format("ragged policy tree".into()));
            }
        }
        Ok(tree)
    }
}

/// Sentinel child index past the last step of a [`FlatPolicy`].
pub const END: usize = usize::MAX;

/// Array form of a [`PolicyTree`]; node 0 is the root, nodes are numbered
/// breadth-first.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatPolicy {
    pub actions: Vec<usize>,
    pub step: Vec<usize>,
    children: Vec<usize>,
    n_obs: usize,
    depth: usize,
}

impl FlatPolicy {
    fn new(tree: &PolicyTree, n_obs: usize) -> Self {
        assert!(tree.children.is_empty() || tree.children.len() == n_obs);
        let depth = tree.depth();
        let mut actions = Vec::new();
        let mut step = Vec::new();
        let mut children = Vec::new();
        let mut level = vec![tree];
        let mut next_id = 1;
        let mut t = 0;
        while !level.is_empty() {
            for node in &level {
                actions.push(node.action);
                step.push(t);
                if node.children.is_empty() {
                    children.extend(std::iter::repeat(END).take(n_obs));
                } else {
                    for _ in 0..n_obs {
                        children.push(next_id);
                        next_id += 1;
                    }
                }
            }
            level = level.iter().flat_map(|n| n.children.iter()).collect();
            t += 1;
        }
        Self { actions, step, children, n_obs, depth }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    #[inline]
    pub fn child(&self, node: usize, o: usize) -> usize {
        self.children[node * self.n_obs + o]
    }

    /// Node reached by following `history` from the root.
    pub fn node_of(&self, history: &[usize]) -> Option<usize> {
        let mut node = 0;
        for &o in history {
            node = self.child(node, o);
            if node == END {
                return None;
            }
        }
        Some(node)
    }

    /// Observation history leading to `node`.
    pub fn history_of(&self, node: usize) -> Vec<usize> {
        let mut parent = vec![(END, 0); self.len()];
        for n in 0..self.len() {
            for o in 0..self.n_obs {
                let c = self.child(n, o);
                if c != END {
                    parent[c] = (n, o);
                }
            }
        }
        let mut h = Vec::new();
        let mut cur = node;
        while cur != 0 {
            let (p, o) = parent[cur];
            h.push(o);
            cur = p;
        }
        h.reverse();
        h
    }

    /// Rebuilds a tree with the given per-node actions.
    pub fn to_tree(&self, actions: &[usize]) -> PolicyTree {
        PolicyTree::from_bfs_actions(actions, self.n_obs, self.depth)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn complete_node_counts() {
        assert_eq!(PolicyTree::complete_node_count(2, 3), 7);
        assert_eq!(PolicyTree::complete_node_count(3, 3), 13);
        assert_eq!(PolicyTree::constant(1, 3, 2).node_count(), 7);
        assert_eq!(PolicyTree::count(2, 2, 3), 128.0);
        assert_eq!(PolicyTree::count(5, 3, 3), 5f64.powi(13));
    }

    #[test]
    fn index_enumeration_is_a_bijection() {
        let mut seen = std::collections::HashSet::new();
        for idx in 0..128 {
            let t = PolicyTree::from_index(idx, 2, 2, 3);
            assert!(t.is_complete(2));
            assert_eq!(t.depth(), 3);
            assert!(seen.insert(t));
        }
        assert_eq!(PolicyTree::from_index(0, 2, 2, 3), PolicyTree::constant(0, 3, 2));
        assert_eq!(PolicyTree::from_index(127, 2, 2, 3), PolicyTree::constant(1, 3, 2));
    }

    #[test]
    fn flat_policy_follows_histories() {
        let t = PolicyTree::from_bfs_actions(&[0, 1, 0, 1, 1, 0, 0], 2, 3);
        let f = t.flatten(2);
        assert_eq!(f.len(), 7);
        for h in [vec![], vec![0], vec![1], vec![0, 1], vec![1, 0]] {
            let node = f.node_of(&h).unwrap();
            assert_eq!(f.actions[node], t.act(&h).unwrap());
            assert_eq!(f.history_of(node), h);
            assert_eq!(f.step[node], h.len());
        }
        assert_eq!(f.node_of(&[0, 0, 0]), None);
    }

    #[test]
    fn json_rejects_malformed_trees() {
        let acts = vec!["a".to_string(), "b".to_string()];
        let obs = vec!["x".to_string(), "y".to_string()];
        let v = serde_json::json!({"action": "c"});
        assert!(PolicyTree::from_json(&v, &acts, &obs).is_err());
        let v = serde_json::json!({"action": "a", "children": {"x": {"action": "a"}}});
        assert!(PolicyTree::from_json(&v, &acts, &obs).is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip(seed in any::<u64>(), depth in 1usize..4, unreach in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let acts: Vec<String> = ["MS", "MN", "ME"].iter().map(|s| s.to_string()).collect();
            let obs: Vec<String> = ["RW", "LW", "NW"].iter().map(|s| s.to_string()).collect();
            let mut t = PolicyTree::random(&mut rng, 3, 3, depth);
            if unreach && depth > 1 {
                t.children[1] = PolicyTree::unreachable(depth - 1, 3);
            }
            let v = t.to_json(&acts, &obs);
            let back = PolicyTree::from_json(&v, &acts, &obs).unwrap();
            prop_assert_eq!(back, t);
        }

        #[test]
        fn bfs_round_trip(seed in any::<u64>(), depth in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = PolicyTree::random(&mut rng, 4, 2, depth);
            prop_assert_eq!(PolicyTree::from_bfs_actions(&t.bfs_actions(), 2, depth), t);
        }
    }
}
