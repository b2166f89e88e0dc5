//! Direct checks of the atomic formulas on interned rows.

use std::collections::{HashMap, HashSet};

type Rows<'a, 'b> = &'a [&'b [u32]];

#[inline]
fn key(row: &[u32], cols: &[usize]) -> Vec<u32> {
    cols.iter().map(|&c| row[c]).collect()
}

pub(crate) fn dep(rows: Rows, x: &[usize], y: &[usize]) -> bool {
    if y.is_empty() {
        return true;
    }
    let mut seen: HashMap<Vec<u32>, Vec<u32>> = HashMap::with_capacity(rows.len());
    for r in rows {
        let ky = key(r, y);
        match seen.get(&key(r, x)) {
            Some(prev) if *prev != ky => return false,
            Some(_) => {}
            None => {
                seen.insert(key(r, x), ky);
            }
        }
    }
    true
}

pub(crate) fn gen_dep(rows: Rows, x1: &[usize], x2: &[usize], y1: &[usize], y2: &[usize]) -> bool {
    // For each value of x̄₂, the set of ȳ₂ values that come with it.
    let mut by_x2: HashMap<Vec<u32>, HashSet<Vec<u32>>> = HashMap::new();
    for t in rows {
        by_x2.entry(key(t, x2)).or_default().insert(key(t, y2));
    }
    rows.iter().all(|s| match by_x2.get(&key(s, x1)) {
        None => true,
        Some(ys) => {
            let mine = key(s, y1);
            ys.iter().all(|v| *v == mine)
        }
    })
}

pub(crate) fn indep(rows: Rows, x: &[usize], z: &[usize], y: &[usize]) -> bool {
    if x.is_empty() || y.is_empty() {
        return true;
    }
    #[derive(Default)]
    struct Class {
        xs: HashSet<Vec<u32>>,
        ys: HashSet<Vec<u32>>,
        pairs: HashSet<(Vec<u32>, Vec<u32>)>,
    }
    let mut classes: HashMap<Vec<u32>, Class> = HashMap::new();
    for r in rows {
        let c = classes.entry(key(r, z)).or_default();
        let (a, b) = (key(r, x), key(r, y));
        c.xs.insert(a.clone());
        c.ys.insert(b.clone());
        c.pairs.insert((a, b));
    }
    classes.values().all(|c| c.pairs.len() == c.xs.len() * c.ys.len())
}

pub(crate) fn incl(rows: Rows, a: &[usize], b: &[usize]) -> bool {
    let sup: HashSet<Vec<u32>> = rows.iter().map(|r| key(r, b)).collect();
    rows.iter().all(|r| sup.contains(&key(r, a)))
}

pub(crate) fn excl(rows: Rows, a: &[usize], b: &[usize]) -> bool {
    let left: HashSet<Vec<u32>> = rows.iter().map(|r| key(r, a)).collect();
    rows.iter().all(|r| !left.contains(&key(r, b)))
}

pub(crate) fn nc(rows: Rows, xs: &[usize], y: usize) -> bool {
    let ys: HashSet<u32> = rows.iter().map(|r| r[y]).collect();
    rows.iter().all(|s| xs.iter().all(|&c| !ys.contains(&s[c]) || s[c] == s[y]))
}

/// Is there a set `S` of values meeting every row's value set in exactly one element?
pub(crate) fn ncc(rows: Rows, xs: &[usize]) -> bool {
    let mut sets: Vec<Vec<u32>> = rows
        .iter()
        .map(|r| {
            let mut v: Vec<u32> = xs.iter().map(|&c| r[c]).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    sets.sort();
    sets.dedup();
    exact_hitting_set(&sets).is_some()
}

/// Searches for `S` with `|S ∩ B| = 1` for every block `B`; returns it sorted.
pub(crate) fn exact_hitting_set(blocks: &[Vec<u32>]) -> Option<Vec<u32>> {
    if blocks.iter().any(|b| b.is_empty()) {
        return None;
    }
    let mut chosen: HashSet<u32> = HashSet::new();
    let mut banned: HashSet<u32> = HashSet::new();
    if hit(blocks, &mut chosen, &mut banned) {
        let mut s: Vec<u32> = chosen.into_iter().collect();
        s.sort_unstable();
        Some(s)
    } else {
        None
    }
}

fn hit(blocks: &[Vec<u32>], chosen: &mut HashSet<u32>, banned: &mut HashSet<u32>) -> bool {
    // Pick the unsatisfied block with the fewest remaining options.
    let mut best: Option<(usize, Vec<u32>)> = None;
    for b in blocks {
        let hits = b.iter().filter(|v| chosen.contains(v)).count();
        if hits > 1 {
            return false;
        }
        if hits == 1 {
            continue;
        }
        let opts: Vec<u32> = b.iter().copied().filter(|v| !banned.contains(v)).collect();
        if opts.is_empty() {
            return false;
        }
        if best.as_ref().is_none_or(|(n, _)| opts.len() < *n) {
            best = Some((opts.len(), opts));
        }
    }
    let Some((_, opts)) = best else {
        return true;
    };
    let mut sibling_bans = Vec::new();
    let mut found = false;
    for v in opts {
        chosen.insert(v);
        // Everything sharing a block with v can no longer be chosen.
        let mut local = Vec::new();
        for b in blocks.iter().filter(|b| b.contains(&v)) {
            for &w in b {
                if w != v && banned.insert(w) {
                    local.push(w);
                }
            }
        }
        found = hit(blocks, chosen, banned);
        for w in local {
            banned.remove(&w);
        }
        if found {
            break;
        }
        chosen.remove(&v);
        // Later siblings only need to cover solutions avoiding v.
        if banned.insert(v) {
            sibling_bans.push(v);
        }
    }
    for w in sibling_bans {
        banned.remove(&w);
    }
    found
}
