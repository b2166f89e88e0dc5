//! Relational team semantics over a compiled program.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::eval::atoms;
use crate::eval::compile::{ExistsPlan, Id, Node, Program, Tm};
use crate::eval::EvalBudget;

type Rows<'a, 'b> = &'a [&'b [u32]];

pub(crate) struct Evaluator<'p> {
    prog: &'p Program,
    universe: Vec<u32>,
    budget: EvalBudget,
    steps: u64,
}

fn mask_of(indices: &[usize], n: usize) -> Vec<u64> {
    let mut m = vec![0u64; n.div_ceil(64)];
    for &i in indices {
        m[i / 64] |= 1 << (i % 64);
    }
    m
}

fn sort_dedup(rows: &mut Vec<Vec<u32>>) {
    rows.sort_unstable();
    rows.dedup();
}

impl<'p> Evaluator<'p> {
    pub fn new(prog: &'p Program, universe: Vec<u32>, budget: EvalBudget) -> Self {
        Evaluator { prog, universe, budget, steps: 0 }
    }

    fn tick(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > self.budget.max_steps {
            return Err(Error::Budget(format!("search exceeded {} steps", self.budget.max_steps)));
        }
        Ok(())
    }

    pub fn run(&mut self, rows: Rows) -> Result<bool> {
        if self.universe.len() > self.budget.max_universe {
            return Err(Error::Budget(format!(
                "universe of {} values exceeds the limit of {}",
                self.universe.len(),
                self.budget.max_universe
            )));
        }
        self.eval(self.prog.root, rows)
    }

    /// Row-wise truth of a flat formula.
    fn row_sat(&self, id: Id, row: &[u32]) -> bool {
        let val = |t: Tm| match t {
            Tm::Col(c) => row[c],
            Tm::Val(v) => v,
        };
        match &self.prog.nodes[id] {
            Node::Lit { eq, a, b } => (val(*a) == val(*b)) == *eq,
            Node::And(cs) => cs.iter().all(|&c| self.row_sat(c, row)),
            Node::Or { children, .. } => children.iter().any(|&c| self.row_sat(c, row)),
            _ => unreachable!("row_sat on a non-flat node"),
        }
    }

    pub fn eval(&mut self, id: Id, rows: Rows) -> Result<bool> {
        self.tick()?;
        if rows.is_empty() {
            return Ok(true);
        }
        if self.prog.info[id].flat {
            return Ok(rows.iter().all(|r| self.row_sat(id, r)));
        }
        let prog = self.prog;
        Ok(match &prog.nodes[id] {
            Node::Lit { .. } => unreachable!("literals are flat"),
            Node::Dep { x, y } => atoms::dep(rows, x, y),
            Node::GenDep { x1, x2, y1, y2 } => atoms::gen_dep(rows, x1, x2, y1, y2),
            Node::Indep { x, z, y } => atoms::indep(rows, x, z, y),
            Node::Incl { a, b } => atoms::incl(rows, a, b),
            Node::Excl { a, b } => atoms::excl(rows, a, b),
            Node::Nc { xs, y } => atoms::nc(rows, xs, *y),
            Node::Ncc { xs } => atoms::ncc(rows, xs),
            Node::And(cs) => {
                for &c in cs {
                    if !self.eval(c, rows)? {
                        return Ok(false);
                    }
                }
                true
            }
            Node::Or { children, filters } => self.eval_or(children, filters, rows)?,
            Node::Forall { col, fresh, body } => {
                let mut out = Vec::with_capacity(rows.len() * self.universe.len());
                for r in rows {
                    for &a in &self.universe {
                        let mut nr = r.to_vec();
                        if *fresh {
                            nr.push(a);
                        } else {
                            nr[*col] = a;
                        }
                        out.push(nr);
                    }
                }
                if !*fresh {
                    sort_dedup(&mut out);
                }
                if out.len() > self.budget.max_rows {
                    return Err(Error::Budget(format!(
                        "universal quantifier produced {} rows (limit {})",
                        out.len(),
                        self.budget.max_rows
                    )));
                }
                let refs: Vec<&[u32]> = out.iter().map(|r| r.as_slice()).collect();
                self.eval(*body, &refs)?
            }
            Node::Exists(plan) => {
                if plan.single {
                    self.exists_single(plan, rows)?
                } else {
                    self.exists_sets(plan, rows)?
                }
            }
        })
    }

    // ---------------------------------------------------------------- disjunction

    fn eval_or(&mut self, children: &[Id], filters: &[Vec<Id>], rows: Rows) -> Result<bool> {
        let k = children.len();
        let allowed: Vec<Vec<usize>> =
            rows.iter().map(|r| (0..k).filter(|&c| filters[c].iter().all(|&f| self.row_sat(f, r))).collect()).collect();
        if allowed.iter().any(|a| a.is_empty()) {
            return Ok(false);
        }
        let info = &self.prog.info;
        if children.iter().all(|&c| info[c].flat) {
            return Ok(true);
        }
        for c in 0..k {
            if allowed.iter().all(|a| a.contains(&c)) && self.eval(children[c], rows)? {
                return Ok(true);
            }
        }
        let mut search = OrSearch { children, rows, allowed, memo: HashMap::new() };
        if children.iter().all(|&c| info[c].dc) {
            search.partition(self)
        } else {
            search.cover(self)
        }
    }

    // ---------------------------------------------------------------- quantifiers

    fn extend(plan: &ExistsPlan, row: &[u32], values: &[u32]) -> Vec<u32> {
        let mut nr = Vec::with_capacity(plan.width_out);
        nr.extend_from_slice(row);
        nr.resize(plan.width_out, 0);
        for (&c, &v) in plan.cols.iter().zip(values) {
            nr[c] = v;
        }
        nr
    }

    fn candidates(&self, plan: &ExistsPlan, rows: Rows) -> Vec<Vec<u32>> {
        plan.bounds
            .iter()
            .map(|bound| {
                let mut cand = self.universe.clone();
                for &col in bound {
                    let present: HashSet<u32> = rows.iter().map(|r| r[col]).collect();
                    cand.retain(|v| present.contains(v));
                }
                cand
            })
            .collect()
    }

    fn checks_hold(&mut self, ids: &[Id], rows: &[Vec<u32>]) -> Result<bool> {
        if ids.is_empty() || rows.is_empty() {
            return Ok(true);
        }
        let mut sorted: Vec<&[u32]> = rows.iter().map(|r| r.as_slice()).collect();
        sorted.sort_unstable();
        sorted.dedup();
        for &c in ids {
            if !self.eval(c, &sorted)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Existential block where every variable takes one value per row.
    ///
    /// Rows are grouped into units sharing the values of all guard columns;
    /// each unit picks one tuple. Guarded variables are further tied across
    /// units through their own key. Search is depth first with forward
    /// checking of the downward-closed conjuncts.
    fn exists_single(&mut self, plan: &ExistsPlan, rows: Rows) -> Result<bool> {
        let cand = self.candidates(plan, rows);
        if cand.iter().any(|c| c.is_empty()) {
            return Ok(false);
        }
        let nv = plan.cols.len();
        let all_outer: Vec<usize> = (0..plan.width_in).collect();
        let keys: Vec<&[usize]> = plan.guards.iter().map(|g| g.as_deref().unwrap_or(&all_outer)).collect();
        let mut unit_cols: Vec<usize> = keys.iter().flat_map(|k| k.iter().copied()).collect();
        unit_cols.sort_unstable();
        unit_cols.dedup();

        let mut unit_map: BTreeMap<Vec<u32>, Vec<usize>> = BTreeMap::new();
        for (i, r) in rows.iter().enumerate() {
            unit_map.entry(unit_cols.iter().map(|&c| r[c]).collect()).or_default().push(i);
        }
        let mut point_ids: HashMap<(usize, Vec<u32>), usize> = HashMap::new();
        let mut point_var: Vec<usize> = Vec::new();
        let units: Vec<Unit> = unit_map
            .into_values()
            .map(|members| {
                let r = rows[members[0]];
                let points = (0..nv)
                    .map(|v| {
                        let k = (v, keys[v].iter().map(|&c| r[c]).collect());
                        *point_ids.entry(k).or_insert_with(|| {
                            point_var.push(v);
                            point_var.len() - 1
                        })
                    })
                    .collect();
                Unit { members, points }
            })
            .collect();

        let mut st = SingleSearch {
            plan,
            rows,
            cand,
            units,
            assigned: vec![None; point_var.len()],
            decided: vec![false; 0],
            ext: Vec::new(),
        };
        st.decided = vec![false; st.units.len()];
        st.run(self)
    }

    /// Single existential variable with set-valued choices per row.
    fn exists_sets(&mut self, plan: &ExistsPlan, rows: Rows) -> Result<bool> {
        let cand = self.candidates(plan, rows).remove(0);
        if cand.is_empty() {
            return Ok(false);
        }
        if cand.len() > 20 {
            return Err(Error::Budget(format!("set-valued existential over {} candidate values", cand.len())));
        }
        let mut subsets: Vec<Vec<u32>> = (1u32..(1 << cand.len()))
            .map(|m| cand.iter().enumerate().filter(|(i, _)| m & (1 << i) != 0).map(|(_, v)| *v).collect())
            .collect();
        subsets.sort_by_key(|s: &Vec<u32>| s.len());
        let mut ext = Vec::new();
        self.sets_dfs(plan, rows, &subsets, 0, &mut ext)
    }

    fn sets_dfs(
        &mut self,
        plan: &ExistsPlan,
        rows: Rows,
        subsets: &[Vec<u32>],
        i: usize,
        ext: &mut Vec<Vec<u32>>,
    ) -> Result<bool> {
        self.tick()?;
        if i == rows.len() {
            return self.checks_hold(&plan.leaf_checks, ext);
        }
        for s in subsets {
            let before = ext.len();
            for &v in s {
                ext.push(Self::extend(plan, rows[i], &[v]));
            }
            if self.checks_hold(&plan.checks, ext)? && self.sets_dfs(plan, rows, subsets, i + 1, ext)? {
                return Ok(true);
            }
            ext.truncate(before);
        }
        Ok(false)
    }
}

struct Unit {
    members: Vec<usize>,
    /// Decision point of each block variable.
    points: Vec<usize>,
}

struct SingleSearch<'a, 'b, 'c> {
    plan: &'a ExistsPlan,
    rows: Rows<'b, 'c>,
    cand: Vec<Vec<u32>>,
    units: Vec<Unit>,
    assigned: Vec<Option<u32>>,
    decided: Vec<bool>,
    ext: Vec<Vec<u32>>,
}

impl SingleSearch<'_, '_, '_> {
    fn options(&self, u: usize) -> Vec<Vec<u32>> {
        let mut out: Vec<Vec<u32>> = vec![Vec::new()];
        let unit = &self.units[u];
        for (v, &p) in unit.points.iter().enumerate() {
            // A point may occur twice in one unit only if two variables share it, which cannot happen.
            let choices: Vec<u32> = match self.assigned[p] {
                Some(a) => vec![a],
                None => self.cand[v].clone(),
            };
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    choices.iter().map(move |&a| {
                        let mut t = prefix.clone();
                        t.push(a);
                        t
                    })
                })
                .collect();
        }
        out
    }

    fn push_unit(&mut self, u: usize, tuple: &[u32]) -> usize {
        let before = self.ext.len();
        for &m in &self.units[u].members {
            let r = Evaluator::extend(self.plan, self.rows[m], tuple);
            self.ext.push(r);
        }
        before
    }

    fn viable(&mut self, ev: &mut Evaluator, u: usize) -> Result<Vec<Vec<u32>>> {
        let mut ok = Vec::new();
        for t in self.options(u) {
            let before = self.push_unit(u, &t);
            let pass = ev.checks_hold(&self.plan.checks, &self.ext)?;
            self.ext.truncate(before);
            if pass {
                ok.push(t);
            }
        }
        Ok(ok)
    }

    fn run(&mut self, ev: &mut Evaluator) -> Result<bool> {
        ev.tick()?;
        let mut best: Option<(usize, Vec<Vec<u32>>)> = None;
        for u in 0..self.units.len() {
            if self.decided[u] {
                continue;
            }
            let opts = self.viable(ev, u)?;
            if opts.is_empty() {
                return Ok(false);
            }
            let better = best.as_ref().is_none_or(|(_, b)| opts.len() < b.len());
            if better {
                let single = opts.len() == 1;
                best = Some((u, opts));
                if single {
                    break;
                }
            }
        }
        let Some((u, opts)) = best else {
            return ev.checks_hold(&self.plan.leaf_checks, &self.ext);
        };
        self.decided[u] = true;
        for t in opts {
            let mut fixed = Vec::new();
            for (v, &p) in self.units[u].points.iter().enumerate() {
                if self.assigned[p].is_none() {
                    self.assigned[p] = Some(t[v]);
                    fixed.push(p);
                }
            }
            let before = self.push_unit(u, &t);
            let found = self.run(ev)?;
            self.ext.truncate(before);
            for p in fixed {
                self.assigned[p] = None;
            }
            if found {
                self.decided[u] = false;
                return Ok(true);
            }
        }
        self.decided[u] = false;
        Ok(false)
    }
}

struct OrSearch<'a, 'b, 'c> {
    children: &'a [Id],
    rows: Rows<'b, 'c>,
    allowed: Vec<Vec<usize>>,
    memo: HashMap<(usize, Vec<u64>), bool>,
}

impl OrSearch<'_, '_, '_> {
    fn check(&mut self, ev: &mut Evaluator, c: usize, part: &[usize]) -> Result<bool> {
        if part.is_empty() {
            return Ok(true);
        }
        let key = (c, mask_of(part, self.rows.len()));
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let sub: Vec<&[u32]> = part.iter().map(|&i| self.rows[i]).collect();
        let v = ev.eval(self.children[c], &sub)?;
        if self.memo.len() < ev.budget.memo_limit {
            self.memo.insert(key, v);
        }
        Ok(v)
    }

    fn check_with(&mut self, ev: &mut Evaluator, c: usize, part: &[usize], r: usize) -> Result<bool> {
        if ev.prog.info[self.children[c]].flat {
            // Rows already passed the child's filter, which for flat children is the child itself.
            return Ok(true);
        }
        let mut p = part.to_vec();
        p.push(r);
        p.sort_unstable();
        self.check(ev, c, &p)
    }

    /// All disjuncts downward closed: look for a partition of the rows.
    fn partition(&mut self, ev: &mut Evaluator) -> Result<bool> {
        let k = self.children.len();
        let mut parts: Vec<Vec<usize>> = vec![Vec::new(); k];
        let mut open = Vec::new();
        for (i, a) in self.allowed.iter().enumerate() {
            if a.len() == 1 {
                parts[a[0]].push(i);
            } else {
                open.push(i);
            }
        }
        for c in 0..k {
            let p = parts[c].clone();
            if !self.check(ev, c, &p)? {
                return Ok(false);
            }
        }
        self.partition_dfs(ev, &mut parts, &mut open)
    }

    fn partition_dfs(&mut self, ev: &mut Evaluator, parts: &mut [Vec<usize>], open: &mut Vec<usize>) -> Result<bool> {
        ev.tick()?;
        if open.is_empty() {
            return Ok(true);
        }
        let mut best: Option<(usize, Vec<usize>)> = None;
        for (pos, &r) in open.iter().enumerate() {
            let mut viable = Vec::new();
            for c in self.allowed[r].clone() {
                if self.check_with(ev, c, &parts[c], r)? {
                    viable.push(c);
                }
            }
            if viable.is_empty() {
                return Ok(false);
            }
            if best.as_ref().is_none_or(|(_, b)| viable.len() < b.len()) {
                best = Some((pos, viable));
            }
        }
        let (pos, viable) = best.expect("open is nonempty");
        let r = open.swap_remove(pos);
        for c in viable {
            parts[c].push(r);
            parts[c].sort_unstable();
            let found = self.partition_dfs(ev, parts, open)?;
            parts[c].retain(|&x| x != r);
            if found {
                open.push(r);
                let last = open.len() - 1;
                open.swap(pos, last);
                return Ok(true);
            }
        }
        open.push(r);
        let last = open.len() - 1;
        open.swap(pos, last);
        Ok(false)
    }

    /// Some disjunct is not downward closed: rows go either to one downward-closed
    /// disjunct or to a nonempty set of the others.
    fn cover(&mut self, ev: &mut Evaluator) -> Result<bool> {
        let k = self.children.len();
        let mut parts: Vec<Vec<usize>> = vec![Vec::new(); k];
        self.cover_dfs(ev, 0, &mut parts)
    }

    fn cover_dfs(&mut self, ev: &mut Evaluator, r: usize, parts: &mut [Vec<usize>]) -> Result<bool> {
        ev.tick()?;
        if r == self.rows.len() {
            for c in 0..self.children.len() {
                if !ev.prog.info[self.children[c]].dc {
                    let p = parts[c].clone();
                    if !self.check(ev, c, &p)? {
                        return Ok(false);
                    }
                }
            }
            return Ok(true);
        }
        let allowed = self.allowed[r].clone();
        let (dc, other): (Vec<usize>, Vec<usize>) = allowed.iter().partition(|&&c| ev.prog.info[self.children[c]].dc);
        for c in dc {
            if self.check_with(ev, c, &parts[c], r)? {
                parts[c].push(r);
                let found = self.cover_dfs(ev, r + 1, parts)?;
                parts[c].pop();
                if found {
                    return Ok(true);
                }
            }
        }
        for m in 1u32..(1 << other.len()) {
            let chosen: Vec<usize> =
                other.iter().enumerate().filter(|(i, _)| m & (1 << i) != 0).map(|(_, &c)| c).collect();
            for &c in &chosen {
                parts[c].push(r);
            }
            let found = self.cover_dfs(ev, r + 1, parts)?;
            for &c in &chosen {
                parts[c].pop();
            }
            if found {
                return Ok(true);
            }
        }
        Ok(false)
    }
}
