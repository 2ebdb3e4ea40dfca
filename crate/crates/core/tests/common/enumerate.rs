//! Exhaustive enumeration of terms in the Set/Bool/Pi fragment: `Set`,
//! `Bool`, `true`, `false`, Pi types, λ-abstractions and variable-headed
//! spines of applications and conditionals. Sizes follow `term_size`.

use std::collections::HashMap;

use metacheck_core::syntax::{Context, Elim, Head, Term};

use super::{std_defs, well_typed};

#[derive(Default)]
pub struct Enumerator {
    terms: HashMap<(usize, usize), Vec<Term>>,
    spines: HashMap<(usize, usize), Vec<Vec<Elim>>>,
}

impl Enumerator {
    pub fn new() -> Self {
        Enumerator::default()
    }

    /// All terms of exactly `size` nodes with `scope` free variables.
    pub fn exact(&mut self, scope: usize, size: usize) -> Vec<Term> {
        if let Some(v) = self.terms.get(&(scope, size)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if size == 1 {
            out.extend([Term::Set, Term::Bool, Term::True, Term::False]);
        }
        if size >= 2 {
            for b in self.exact(scope + 1, size - 1) {
                out.push(Term::lam(b));
            }
            for sa in 1..size - 1 {
                let sb = size - 1 - sa;
                let doms = self.exact(scope, sa);
                let cods = self.exact(scope + 1, sb);
                for a in &doms {
                    for b in &cods {
                        out.push(Term::pi(a.clone(), b.clone()));
                    }
                }
            }
        }
        for spine in self.spine(scope, size - 1) {
            for i in 0..scope {
                out.push(Term::Neutral(Head::Var(i), spine.clone()));
            }
        }
        self.terms.insert((scope, size), out.clone());
        out
    }

    /// All terms of at most `max` nodes.
    pub fn up_to(&mut self, scope: usize, max: usize) -> Vec<Term> {
        (1..=max).flat_map(|s| self.exact(scope, s)).collect()
    }

    /// Spines of total size exactly `size`.
    fn spine(&mut self, scope: usize, size: usize) -> Vec<Vec<Elim>> {
        if size == 0 {
            return vec![Vec::new()];
        }
        if let Some(v) = self.spines.get(&(scope, size)) {
            return v.clone();
        }
        let mut out = Vec::new();
        // The last elimination takes `last` nodes, the prefix the rest.
        for last in 2..=size {
            let prefixes = self.spine(scope, size - last);
            let mut finals = Vec::new();
            for u in self.exact(scope, last - 1) {
                finals.push(Elim::App(u));
            }
            for sm in 1..last {
                for st in 1..last {
                    if sm + st >= last - 1 {
                        continue;
                    }
                    let se = last - 1 - sm - st;
                    let motives = self.exact(scope + 1, sm);
                    let thens = self.exact(scope, st);
                    let elses = self.exact(scope, se);
                    for m in &motives {
                        for t in &thens {
                            for e in &elses {
                                finals.push(Elim::If {
                                    motive: m.clone(),
                                    then_branch: t.clone(),
                                    else_branch: e.clone(),
                                });
                            }
                        }
                    }
                }
            }
            for p in &prefixes {
                for f in &finals {
                    let mut s = p.clone();
                    s.push(f.clone());
                    out.push(s);
                }
            }
        }
        self.spines.insert((scope, size), out.clone());
        out
    }
}

/// Every closed type of at most `max_ty` nodes paired with every closed term
/// of at most `max_term` nodes that checks against it.
pub fn well_typed_pairs(max_term: usize, max_ty: usize) -> Vec<(Term, Term)> {
    let defs = std_defs();
    let ctx = Context::new();
    let mut e = Enumerator::new();
    let types: Vec<Term> = e
        .up_to(0, max_ty)
        .into_iter()
        .filter(|a| well_typed(&defs, &ctx, a, &Term::Set))
        .collect();
    let terms = e.up_to(0, max_term);
    let mut out = Vec::new();
    for t in &terms {
        for a in &types {
            if well_typed(&defs, &ctx, t, a) {
                out.push((t.clone(), a.clone()));
            }
        }
    }
    out
}
