//! Ordered decision diagrams for posterior-threshold classifiers.
//!
//! Compilation tabulates the classifier over every feature instantiation and
//! folds the table bottom-up, hash-consing identical nodes and skipping nodes
//! whose children all coincide. For a fixed variable order the result is the
//! unique reduced diagram of the decision function.
//!
//! Text form: the root reference on line 1, then one decision node per line
//! as `id<TAB>variable<TAB>child…` (one child per state, in state order).
//! Terminals are `T+` and `T-`; ids are assigned in post-order from the root.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::config::{ClassifierConfig, Resolved};
use super::{decide, Label};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::model::{FeatureAssignment, Network};
use crate::par::{map_collect, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeRef {
    Positive,
    Negative,
    Node(usize),
}

impl NodeRef {
    fn terminal(label: Label) -> Self {
        match label {
            Label::Positive => NodeRef::Positive,
            Label::Negative => NodeRef::Negative,
        }
    }

    fn token(self) -> String {
        match self {
            NodeRef::Positive => "T+".into(),
            NodeRef::Negative => "T-".into(),
            NodeRef::Node(id) => id.to_string(),
        }
    }
}

/// Decision node testing the variable at `level` of the diagram's order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OddNode {
    pub level: usize,
    pub children: Vec<NodeRef>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Odd {
    order: Vec<String>,
    states: Vec<Vec<String>>,
    nodes: Vec<OddNode>,
    root: NodeRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum VariableOrder {
    /// The config's feature order.
    #[default]
    Given,
    /// Greedy placement minimizing node count, position by position.
    Greedy,
    Explicit(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct OddOptions {
    pub order: VariableOrder,
    pub reduce: bool,
    pub limits: Limits,
    pub strategy: Strategy,
}

impl Default for OddOptions {
    fn default() -> Self {
        Self {
            order: VariableOrder::Given,
            reduce: true,
            limits: Limits::default(),
            strategy: Strategy::default(),
        }
    }
}

/// Classifier decisions for every instantiation, mixed radix over the
/// config's feature order (first feature most significant).
pub(crate) struct DecisionTable {
    pub cards: Vec<usize>,
    pub strides: Vec<usize>,
    pub labels: Vec<Label>,
}

impl DecisionTable {
    pub fn tabulate(
        net: &Network,
        cfg: &Resolved,
        limits: &Limits,
        strategy: Strategy,
    ) -> Result<Self> {
        let cards: Vec<usize> = cfg.features.iter().map(|&v| net.cardinality(v)).collect();
        let size = cards.iter().map(|&c| c as u128).product::<u128>();
        if size > limits.diagram_cap {
            return Err(Error::CapExceeded {
                what: "feature instantiations",
                size,
                cap: limits.diagram_cap,
            });
        }
        let strides = strides(&cards);
        let labels = map_collect(strategy, size as usize, |i| {
            let states: Vec<usize> = cards
                .iter()
                .zip(&strides)
                .map(|(&c, &s)| (i / s) % c)
                .collect();
            decide(net, cfg, &states)
        })?;
        Ok(Self {
            cards,
            strides,
            labels,
        })
    }
}

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut out = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        out[i] = out[i + 1] * cards[i + 1];
    }
    out
}

struct Builder<'a> {
    table: &'a DecisionTable,
    /// diagram level -> config feature position
    perm: &'a [usize],
    reduce: bool,
    nodes: Vec<OddNode>,
    unique: HashMap<OddNode, usize>,
}

impl Builder<'_> {
    fn build(&mut self, level: usize, offset: usize) -> NodeRef {
        if level == self.perm.len() {
            return NodeRef::terminal(self.table.labels[offset]);
        }
        let pos = self.perm[level];
        let children: Vec<NodeRef> = (0..self.table.cards[pos])
            .map(|s| self.build(level + 1, offset + s * self.table.strides[pos]))
            .collect();
        if self.reduce && children.iter().all(|c| *c == children[0]) {
            return children[0];
        }
        let node = OddNode { level, children };
        if self.reduce {
            if let Some(&id) = self.unique.get(&node) {
                return NodeRef::Node(id);
            }
            self.unique.insert(node.clone(), self.nodes.len());
        }
        self.nodes.push(node);
        NodeRef::Node(self.nodes.len() - 1)
    }
}

/// Renumbers reachable nodes in post-order (children visited in state order).
fn canonical(nodes: &[OddNode], root: NodeRef) -> (Vec<OddNode>, NodeRef) {
    fn visit(
        nodes: &[OddNode],
        at: NodeRef,
        ids: &mut HashMap<usize, usize>,
        out: &mut Vec<OddNode>,
    ) -> NodeRef {
        let NodeRef::Node(old) = at else {
            return at;
        };
        if let Some(&id) = ids.get(&old) {
            return NodeRef::Node(id);
        }
        let children = nodes[old]
            .children
            .iter()
            .map(|&c| visit(nodes, c, ids, out))
            .collect();
        out.push(OddNode {
            level: nodes[old].level,
            children,
        });
        ids.insert(old, out.len() - 1);
        NodeRef::Node(out.len() - 1)
    }
    let mut ids = HashMap::new();
    let mut out = Vec::with_capacity(nodes.len());
    let root = visit(nodes, root, &mut ids, &mut out);
    (out, root)
}

fn build(
    net: &Network,
    cfg: &Resolved,
    table: &DecisionTable,
    perm: &[usize],
    reduce: bool,
) -> Odd {
    let mut b = Builder {
        table,
        perm,
        reduce,
        nodes: Vec::new(),
        unique: HashMap::new(),
    };
    let root = b.build(0, 0);
    let (nodes, root) = canonical(&b.nodes, root);
    let order: Vec<usize> = perm.iter().map(|&p| cfg.features[p]).collect();
    Odd {
        order: order
            .iter()
            .map(|&v| net.variable(v).name.clone())
            .collect(),
        states: order
            .iter()
            .map(|&v| net.variable(v).states.clone())
            .collect(),
        nodes,
        root,
    }
}

fn greedy_perm(net: &Network, cfg: &Resolved, table: &DecisionTable) -> Vec<usize> {
    let k = cfg.features.len();
    let mut placed: Vec<usize> = Vec::with_capacity(k);
    let mut remaining: Vec<usize> = (0..k).collect();
    while !remaining.is_empty() {
        let best = remaining
            .iter()
            .enumerate()
            .map(|(i, &cand)| {
                let mut perm = placed.clone();
                perm.push(cand);
                perm.extend(remaining.iter().copied().filter(|&r| r != cand));
                (build(net, cfg, table, &perm, true).node_count(), i)
            })
            .min()
            .map(|(_, i)| i)
            .unwrap();
        placed.push(remaining.remove(best));
    }
    placed
}

pub fn compile_odd(net: &Network, cfg: &ClassifierConfig) -> Result<Odd> {
    compile_odd_with(net, cfg, &OddOptions::default())
}

pub fn compile_odd_with(net: &Network, cfg: &ClassifierConfig, opts: &OddOptions) -> Result<Odd> {
    let resolved = cfg.resolve(net)?;
    let table = DecisionTable::tabulate(net, &resolved, &opts.limits, opts.strategy)?;
    let perm: Vec<usize> = match &opts.order {
        VariableOrder::Given => (0..resolved.features.len()).collect(),
        VariableOrder::Greedy => greedy_perm(net, &resolved, &table),
        VariableOrder::Explicit(names) => {
            let mut perm = Vec::with_capacity(names.len());
            for name in names {
                let pos = cfg.features.iter().position(|f| f == name).ok_or_else(|| {
                    Error::InvalidConfig(format!("`{name}` in order is not a feature"))
                })?;
                if perm.contains(&pos) {
                    return Err(Error::InvalidConfig(format!("`{name}` repeated in order")));
                }
                perm.push(pos);
            }
            if perm.len() != cfg.features.len() {
                return Err(Error::InvalidConfig("order must list every feature".into()));
            }
            perm
        }
    };
    Ok(build(net, &resolved, &table, &perm, opts.reduce))
}

impl Odd {
    /// Variable order of the diagram.
    pub fn order(&self) -> &[String] {
        &self.order
    }

    pub fn nodes(&self) -> &[OddNode] {
        &self.nodes
    }

    pub fn root(&self) -> NodeRef {
        self.root
    }

    /// Decision nodes (terminals excluded).
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Variables that appear on some decision node.
    pub fn support(&self) -> Vec<&str> {
        let mut levels: Vec<usize> = self.nodes.iter().map(|n| n.level).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.into_iter().map(|l| self.order[l].as_str()).collect()
    }

    /// Follows the diagram with states indexed by diagram level.
    pub fn evaluate_states(&self, states: &[usize]) -> Label {
        let mut at = self.root;
        loop {
            match at {
                NodeRef::Positive => return Label::Positive,
                NodeRef::Negative => return Label::Negative,
                NodeRef::Node(id) => {
                    let node = &self.nodes[id];
                    at = node.children[states[node.level]];
                }
            }
        }
    }

    pub fn evaluate(&self, f: &FeatureAssignment) -> Result<Label> {
        let states = self
            .order
            .iter()
            .zip(&self.states)
            .map(|(name, states)| {
                let s = f
                    .get(name)
                    .ok_or_else(|| Error::PartialAssignment(name.clone()))?;
                states
                    .iter()
                    .position(|x| x == s)
                    .ok_or_else(|| Error::UnknownState {
                        variable: name.clone(),
                        state: s.to_string(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.evaluate_states(&states))
    }

    /// Levels strictly increase along every edge.
    pub fn is_ordered(&self) -> bool {
        self.nodes.iter().all(|n| {
            n.children.iter().all(|c| match c {
                NodeRef::Node(id) => self.nodes[*id].level > n.level,
                _ => true,
            })
        })
    }

    /// No redundant tests and no duplicate nodes.
    pub fn is_reduced(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.nodes
            .iter()
            .all(|n| !n.children.iter().all(|c| *c == n.children[0]) && seen.insert(n))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.root.token());
        for (id, node) in self.nodes.iter().enumerate() {
            let _ = write!(out, "{id}\t{}", self.order[node.level]);
            for c in &node.children {
                let _ = write!(out, "\t{}", c.token());
            }
            out.push('\n');
        }
        out
    }

    /// Reads the text form without a known order: variables on decision
    /// nodes are ordered to respect every edge, ties and absent variables
    /// following `features`.
    pub fn read(text: &str, net: &Network, features: &[String]) -> Result<Self> {
        let mut names: Vec<String> = features.to_vec();
        let mut node_var: Vec<usize> = Vec::new();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for line in text.lines().skip(1).filter(|l| !l.is_empty()) {
            let fields: Vec<&str> = line.split('\t').collect();
            let Some(name) = fields.get(1) else { break };
            let var = match names.iter().position(|n| n == name) {
                Some(i) => i,
                None => {
                    names.push(name.to_string());
                    names.len() - 1
                }
            };
            for child in fields.iter().skip(2) {
                if let Ok(id) = child.parse::<usize>() {
                    if let Some(&c) = node_var.get(id) {
                        edges.push((var, c));
                    }
                }
            }
            node_var.push(var);
        }
        let mut indegree = vec![0usize; names.len()];
        for &(_, c) in &edges {
            indegree[c] += 1;
        }
        let mut ready: std::collections::BTreeSet<usize> =
            (0..names.len()).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(names.len());
        while let Some(v) = ready.pop_first() {
            order.push(names[v].clone());
            for &(p, c) in &edges {
                if p == v {
                    indegree[c] -= 1;
                    if indegree[c] == 0 {
                        ready.insert(c);
                    }
                }
            }
        }
        if order.len() != names.len() {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: "diagram edges admit no variable order".into(),
            });
        }
        Self::parse(text, net, &order)
    }

    /// Reads the text form. `order` supplies the diagram's variable order,
    /// which the text only partially records.
    pub fn parse(text: &str, net: &Network, order: &[String]) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            line,
            column: 1,
            message,
        };
        let states: Vec<Vec<String>> = order
            .iter()
            .map(|name| net.index_of(name).map(|v| net.variable(v).states.clone()))
            .collect::<Result<_>>()?;
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, root_line) = lines.next().ok_or_else(|| err(1, "empty diagram".into()))?;
        let mut nodes: Vec<OddNode> = Vec::new();
        let token = |line: usize, tok: &str, limit: usize| -> Result<NodeRef> {
            match tok {
                "T+" => Ok(NodeRef::Positive),
                "T-" => Ok(NodeRef::Negative),
                id => match id.parse::<usize>() {
                    Ok(id) if id < limit => Ok(NodeRef::Node(id)),
                    _ => Err(err(line, format!("bad node reference `{id}`"))),
                },
            }
        };
        for (line, text) in lines {
            if text.is_empty() {
                continue;
            }
            let fields: Vec<&str> = text.split('\t').collect();
            if fields.len() < 3 {
                return Err(err(line, "expected id, variable and children".into()));
            }
            if fields[0].parse::<usize>().ok() != Some(nodes.len()) {
                return Err(err(line, format!("expected node id {}", nodes.len())));
            }
            let level = order
                .iter()
                .position(|v| v == fields[1])
                .ok_or_else(|| err(line, format!("variable `{}` not in order", fields[1])))?;
            if fields.len() - 2 != states[level].len() {
                return Err(err(
                    line,
                    format!("`{}` needs {} children", fields[1], states[level].len()),
                ));
            }
            let children = fields[2..]
                .iter()
                .map(|t| token(line, t, nodes.len()))
                .collect::<Result<Vec<_>>>()?;
            nodes.push(OddNode { level, children });
        }
        let root = token(1, root_line.trim(), nodes.len())?;
        let odd = Self {
            order: order.to_vec(),
            states,
            nodes,
            root,
        };
        if !odd.is_ordered() {
            return Err(err(1, "diagram violates its variable order".into()));
        }
        Ok(odd)
    }
}
