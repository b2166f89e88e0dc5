//! Lowering of formulas to an index-based program over interned values.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::formula::{Formula, Term};
use crate::value::{Value, Var};

pub(crate) type Id = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Tm {
    Col(usize),
    Val(u32),
}

#[derive(Clone, Debug)]
pub(crate) enum Node {
    Lit {
        eq: bool,
        a: Tm,
        b: Tm,
    },
    Dep {
        x: Vec<usize>,
        y: Vec<usize>,
    },
    GenDep {
        x1: Vec<usize>,
        x2: Vec<usize>,
        y1: Vec<usize>,
        y2: Vec<usize>,
    },
    Indep {
        x: Vec<usize>,
        z: Vec<usize>,
        y: Vec<usize>,
    },
    Incl {
        a: Vec<usize>,
        b: Vec<usize>,
    },
    Excl {
        a: Vec<usize>,
        b: Vec<usize>,
    },
    Nc {
        xs: Vec<usize>,
        y: usize,
    },
    Ncc {
        xs: Vec<usize>,
    },
    And(Vec<Id>),
    Or {
        children: Vec<Id>,
        /// Per child, the flat conjuncts a row must satisfy to be placed in that child.
        filters: Vec<Vec<Id>>,
    },
    Exists(ExistsPlan),
    Forall {
        col: usize,
        fresh: bool,
        body: Id,
    },
}

/// How an existential block is searched.
#[derive(Clone, Debug)]
pub(crate) struct ExistsPlan {
    /// Column of each block variable in the extended row.
    pub cols: Vec<usize>,
    pub width_in: usize,
    pub width_out: usize,
    /// Every variable takes a single value per row (the body is downward
    /// closed, or each variable is pinned by a dependence atom on outer columns).
    pub single: bool,
    /// Per variable, the outer columns that determine it.
    pub guards: Vec<Option<Vec<usize>>>,
    /// Per variable, outer columns whose value sets bound its candidates.
    pub bounds: Vec<Vec<usize>>,
    /// Downward-closed conjuncts of the body, checked on partial extensions.
    pub checks: Vec<Id>,
    /// Remaining conjuncts, checked only on complete extensions.
    pub leaf_checks: Vec<Id>,
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Info {
    /// Downward closed.
    pub dc: bool,
    /// Built from literals with ∧ and ∨ only, hence evaluable row by row.
    pub flat: bool,
}

pub(crate) struct Interner {
    values: Vec<Value>,
    index: HashMap<Value, u32>,
}

impl Interner {
    pub fn new(values: BTreeSet<Value>) -> Self {
        let values: Vec<Value> = values.into_iter().collect();
        let index = values.iter().enumerate().map(|(i, v)| (v.clone(), i as u32)).collect();
        Interner { values, index }
    }

    pub fn id(&self, v: &Value) -> u32 {
        self.index[v]
    }

    pub fn value(&self, id: u32) -> &Value {
        &self.values[id as usize]
    }
}

pub(crate) struct Program {
    pub nodes: Vec<Node>,
    pub info: Vec<Info>,
    pub root: Id,
}

struct Compiler<'a> {
    interner: &'a Interner,
    nodes: Vec<Node>,
    info: Vec<Info>,
    scope: Vec<Var>,
}

fn rank(node: &Node, info: Info) -> u8 {
    match node {
        _ if info.flat => 0,
        Node::Or { .. } => 2,
        Node::Exists(_) | Node::Forall { .. } => 3,
        _ => 1,
    }
}

impl<'a> Compiler<'a> {
    fn col(&self, v: &Var) -> Result<usize> {
        self.scope
            .iter()
            .position(|w| w == v)
            .ok_or_else(|| Error::Domain(format!("variable {v} is not bound by the team")))
    }

    fn cols(&self, vs: &[Var]) -> Result<Vec<usize>> {
        vs.iter().map(|v| self.col(v)).collect()
    }

    fn term(&self, t: &Term) -> Result<Tm> {
        Ok(match t {
            Term::Var(v) => Tm::Col(self.col(v)?),
            Term::Const(c) => Tm::Val(self.interner.id(c)),
        })
    }

    fn push(&mut self, node: Node, info: Info) -> Id {
        self.nodes.push(node);
        self.info.push(info);
        self.nodes.len() - 1
    }

    fn atom(&mut self, node: Node, dc: bool) -> Id {
        self.push(node, Info { dc, flat: false })
    }

    fn compile(&mut self, f: &Formula) -> Result<Id> {
        Ok(match f {
            Formula::Eq(a, b) | Formula::Neq(a, b) => {
                let node = Node::Lit { eq: matches!(f, Formula::Eq(..)), a: self.term(a)?, b: self.term(b)? };
                self.push(node, Info { dc: true, flat: true })
            }
            Formula::Dep { det, dependent } => {
                let node = Node::Dep { x: self.cols(det)?, y: self.cols(dependent)? };
                self.atom(node, true)
            }
            Formula::GenDep { x1, x2, y1, y2 } => {
                let node =
                    Node::GenDep { x1: self.cols(x1)?, x2: self.cols(x2)?, y1: self.cols(y1)?, y2: self.cols(y2)? };
                self.atom(node, true)
            }
            Formula::Indep { left, cond, right } => {
                let trivial = left.is_empty() || right.is_empty();
                let node = Node::Indep { x: self.cols(left)?, z: self.cols(cond)?, y: self.cols(right)? };
                self.atom(node, trivial)
            }
            Formula::Incl { sub, sup } => {
                let (a, b) = (self.cols(sub)?, self.cols(sup)?);
                let trivial = a == b;
                self.atom(Node::Incl { a, b }, trivial)
            }
            Formula::Excl { left, right } => {
                let node = Node::Excl { a: self.cols(left)?, b: self.cols(right)? };
                self.atom(node, true)
            }
            Formula::Nc { xs, y } => {
                let node = Node::Nc { xs: self.cols(xs)?, y: self.col(y)? };
                self.atom(node, true)
            }
            Formula::Ncc { xs } => {
                let node = Node::Ncc { xs: self.cols(xs)? };
                self.atom(node, true)
            }
            Formula::And(..) => {
                let mut children = Vec::new();
                for g in f.conjuncts() {
                    let id = self.compile(g)?;
                    match &self.nodes[id] {
                        Node::And(cs) => children.extend(cs.iter().copied()),
                        _ => children.push(id),
                    }
                }
                children.sort_by_key(|&c| rank(&self.nodes[c], self.info[c]));
                let info = Info {
                    dc: children.iter().all(|&c| self.info[c].dc),
                    flat: children.iter().all(|&c| self.info[c].flat),
                };
                self.push(Node::And(children), info)
            }
            Formula::Or(..) => {
                let mut children = Vec::new();
                let mut stack = vec![f];
                while let Some(g) = stack.pop() {
                    match g {
                        Formula::Or(a, b) => {
                            stack.push(b);
                            stack.push(a);
                        }
                        other => children.push(self.compile(other)?),
                    }
                }
                let filters = children
                    .iter()
                    .map(|&c| {
                        if self.info[c].flat {
                            vec![c]
                        } else if let Node::And(cs) = &self.nodes[c] {
                            cs.iter().copied().filter(|&d| self.info[d].flat).collect()
                        } else {
                            Vec::new()
                        }
                    })
                    .collect();
                let info = Info {
                    dc: children.iter().all(|&c| self.info[c].dc),
                    flat: children.iter().all(|&c| self.info[c].flat),
                };
                self.push(Node::Or { children, filters }, info)
            }
            Formula::Forall(x, body) => {
                let (col, fresh) = match self.scope.iter().position(|w| w == x) {
                    Some(i) => (i, false),
                    None => {
                        self.scope.push(x.clone());
                        (self.scope.len() - 1, true)
                    }
                };
                let b = self.compile(body);
                if fresh {
                    self.scope.pop();
                }
                let b = b?;
                let info = Info { dc: self.info[b].dc, flat: false };
                self.push(Node::Forall { col, fresh, body: b }, info)
            }
            Formula::Exists(..) => {
                let mut block = Vec::new();
                let mut body = f;
                while let Formula::Exists(x, g) = body {
                    if block.contains(x) {
                        break;
                    }
                    block.push(x.clone());
                    body = g;
                }
                self.exists_chain(&block, body)?
            }
        })
    }

    fn exists_chain(&mut self, block: &[Var], body: &Formula) -> Result<Id> {
        let width_in = self.scope.len();
        let mut cols = Vec::new();
        for x in block {
            match self.scope.iter().position(|w| w == x) {
                Some(i) => cols.push(i),
                None => {
                    self.scope.push(x.clone());
                    cols.push(self.scope.len() - 1);
                }
            }
        }
        let width_out = self.scope.len();
        let b = self.compile(body);
        self.scope.truncate(width_in);
        let b = b?;

        let shadowed: BTreeSet<usize> = cols.iter().copied().filter(|&c| c < width_in).collect();
        let outer = |cs: &[usize]| cs.iter().all(|c| *c < width_in && !shadowed.contains(c));
        let conjuncts: Vec<Id> = match &self.nodes[b] {
            Node::And(cs) => cs.clone(),
            _ => vec![b],
        };

        let mut guards: Vec<Option<Vec<usize>>> = vec![None; cols.len()];
        let mut bounds: Vec<Vec<usize>> = vec![Vec::new(); cols.len()];
        for &c in &conjuncts {
            let (det, dependent) = match &self.nodes[c] {
                Node::Dep { x, y } => (x, y),
                Node::GenDep { x1, x2, y1, y2 } if x1 == x2 && y1 == y2 => (x1, y1),
                Node::Incl { a, b } => {
                    for (p, q) in a.iter().zip(b) {
                        if let Some(i) = cols.iter().position(|c| c == p) {
                            if outer(&[*q]) {
                                bounds[i].push(*q);
                            }
                        }
                    }
                    continue;
                }
                _ => continue,
            };
            if !outer(det) {
                continue;
            }
            for y in dependent {
                if let Some(i) = cols.iter().position(|c| c == y) {
                    let better = match &guards[i] {
                        None => true,
                        Some(g) => det.len() < g.len(),
                    };
                    if better {
                        guards[i] = Some(det.clone());
                    }
                }
            }
        }

        let dc = self.info[b].dc;
        let single = dc || guards.iter().all(Option::is_some);
        if !single && block.len() > 1 {
            // Search the first variable with set-valued choices and the rest as an inner block.
            let x = &block[0];
            let fresh = !self.scope.contains(x);
            if fresh {
                self.scope.push(x.clone());
            }
            let inner = self.exists_chain(&block[1..], body);
            if fresh {
                self.scope.pop();
            }
            let inner = inner?;
            let col = match self.scope.iter().position(|w| w == x) {
                Some(i) => i,
                None => width_in,
            };
            let plan = ExistsPlan {
                cols: vec![col],
                width_in,
                width_out: if fresh { width_in + 1 } else { width_in },
                single: false,
                guards: vec![None],
                bounds: vec![Vec::new()],
                checks: Vec::new(),
                leaf_checks: vec![inner],
            };
            let info = Info { dc: self.info[inner].dc, flat: false };
            return Ok(self.push(Node::Exists(plan), info));
        }

        let (checks, leaf_checks): (Vec<Id>, Vec<Id>) = conjuncts.iter().partition(|&&c| self.info[c].dc);
        let plan = ExistsPlan { cols, width_in, width_out, single, guards, bounds, checks, leaf_checks };
        Ok(self.push(Node::Exists(plan), Info { dc, flat: false }))
    }
}

pub(crate) fn compile(f: &Formula, domain: &[Var], interner: &Interner) -> Result<Program> {
    f.validate()?;
    let mut c = Compiler { interner, nodes: Vec::new(), info: Vec::new(), scope: domain.to_vec() };
    let root = c.compile(f)?;
    Ok(Program { nodes: c.nodes, info: c.info, root })
}
