//! Corpus-wide checks shared by the integration tests and the acceptance
//! runner. Each returns a one-line summary or the first counterexample.

use metacheck_core::elaborate::{elaborate_check, Constraint, ElabOutput};
use metacheck_core::normalize::{apply_meta_subst, subst, Env};
use metacheck_core::pretty::show;
use metacheck_core::syntax::{
    lookup_var, normal_form_violation, term_size, Context, DefEnv, Head, Ident, MetaId, Signature, Term,
};
use metacheck_core::typecheck::{check, check_context, convert, Conv};
use metacheck_core::unify::{solve, verify_solution, Outcome, SolveResult};
use rand::Rng;

use super::enumerate::well_typed_pairs;
use super::generate::Gen;
use super::{std_defs, Case};

pub const ENUM_TERM_SIZE: usize = 7;
pub const ENUM_TYPE_SIZE: usize = 5;
pub const RANDOM_CASES: usize = 200;
pub const RANDOM_SEED: u64 = 0x5eed_0001;

pub struct Corpus {
    pub defs: DefEnv,
    pub enumerated: Vec<Case>,
    pub random: Vec<Case>,
}

impl Corpus {
    pub fn build() -> Self {
        let enumerated = well_typed_pairs(ENUM_TERM_SIZE, ENUM_TYPE_SIZE)
            .into_iter()
            .map(|(term, ty)| Case {
                ctx: Context::new(),
                term,
                ty,
            })
            .collect();
        let mut g = Gen::new(RANDOM_SEED);
        let random = (0..RANDOM_CASES).map(|_| g.case()).collect();
        Corpus {
            defs: std_defs(),
            enumerated,
            random,
        }
    }

    pub fn cases(&self) -> impl Iterator<Item = &Case> + '_ {
        self.enumerated.iter().chain(self.random.iter())
    }

    pub fn len(&self) -> usize {
        self.enumerated.len() + self.random.len()
    }
}

/// Elaboration and solving of one case.
pub struct Run {
    pub elab: ElabOutput,
    pub result: SolveResult,
}

pub fn run(defs: &DefEnv, case: &Case) -> Result<Run, String> {
    let sig = Signature::new();
    let elab = elaborate_check(&sig, defs, &case.ctx, &case.term, &case.ty)
        .map_err(|e| format!("{}: elaboration error {}", describe(case), e))?;
    let result = solve(&elab.signature, defs, &elab.constraints);
    Ok(Run { elab, result })
}

pub fn describe(case: &Case) -> String {
    format!("{} : {}", show(&case.term, &case.ctx), show(&case.ty, &case.ctx))
}

/// Elaborate then solve: every case ends Solved.
pub fn completeness(corpus: &Corpus, runs: &[Run]) -> Result<String, String> {
    for (case, r) in corpus.cases().zip(runs) {
        if !r.result.outcome.is_solved() {
            return Err(format!("{} ended {:?}", describe(case), r.result.outcome));
        }
    }
    Ok(format!(
        "{} enumerated + {} random cases solved",
        corpus.enumerated.len(),
        corpus.random.len()
    ))
}

/// The original term and the instantiated elaborated term are convertible.
pub fn soundness(corpus: &Corpus, runs: &[Run]) -> Result<String, String> {
    let mut checked = 0;
    for (case, r) in corpus.cases().zip(runs) {
        let Outcome::Solved { theta, signature } = &r.result.outcome else { continue };
        let fail = |msg: String| format!("{}: {}", describe(case), msg);
        let elaborated = apply_meta_subst(theta, &r.elab.term).map_err(|e| fail(e.to_string()))?;
        let env = Env::new(signature, &corpus.defs);
        match convert(env, &case.ctx, &case.term, &elaborated, &case.ty) {
            Ok(Conv::Yes) => checked += 1,
            other => return Err(fail(format!("elaborated to {:?}: {:?}", elaborated, other))),
        }
    }
    Ok(format!("{} solved cases convertible to their elaboration", checked))
}

/// `Γ ⊢ lhs : lhs_ty` and `Γ ⊢ rhs : rhs_ty` with both types well formed.
pub fn constraint_well_formed(sig: &Signature, defs: &DefEnv, c: &Constraint) -> Result<(), String> {
    let env = Env::new(sig, defs);
    check_context(env, &c.ctx).map_err(|e| e.to_string())?;
    for (t, ty) in [(&c.lhs, &c.lhs_ty), (&c.rhs, &c.rhs_ty)] {
        check(env, &c.ctx, ty, &Term::Set).map_err(|e| format!("type of {}: {}", c.show(), e))?;
        check(env, &c.ctx, t, ty).map_err(|e| format!("side of {}: {}", c.show(), e))?;
    }
    Ok(())
}

/// The elaborated term checks against the target in the extended
/// signature and every constraint is well formed.
pub fn well_formed(defs: &DefEnv, case: &Case) -> Result<(), String> {
    let r = run(defs, case)?;
    let env = Env::new(&r.elab.signature, defs);
    check(env, &case.ctx, &r.elab.term, &case.ty)
        .map_err(|e| format!("{}: elaborated term: {}", describe(case), e))?;
    for c in &r.elab.constraints {
        constraint_well_formed(&r.elab.signature, defs, c).map_err(|e| format!("{}: {}", describe(case), e))?;
    }
    Ok(())
}

/// Scope-correct inputs that need not be well typed, checked against
/// well-formed types.
pub fn ill_typed_inputs(seed: u64, count: usize) -> Vec<Case> {
    let mut g = Gen::new(seed);
    let ctxs = super::contexts();
    (0..count)
        .map(|i| {
            let ctx = ctxs[i % ctxs.len()].clone();
            let ty = g.ty(&ctx, 2);
            let term = g.scoped(ctx.len(), 3);
            Case { ctx, term, ty }
        })
        .collect()
}

pub fn well_formedness(corpus: &Corpus, extra: &[Case]) -> Result<String, String> {
    for case in corpus.cases().chain(extra) {
        well_formed(&corpus.defs, case)?;
    }
    Ok(format!(
        "{} well-typed and {} unconstrained inputs elaborate to well-formed problems",
        corpus.len(),
        extra.len()
    ))
}

/// Fresh metas plus constraints stay within four per input node.
pub fn linearity(corpus: &Corpus, runs: &[Run]) -> Result<String, String> {
    let mut worst = 0.0f64;
    for (case, r) in corpus.cases().zip(runs) {
        let cost = r.elab.fresh_count(&Signature::new()) + r.elab.constraints.len();
        let size = term_size(&case.term);
        if cost > 4 * size {
            return Err(format!("{}: {} metas+constraints for size {}", describe(case), cost, size));
        }
        worst = worst.max(cost as f64 / size as f64);
    }
    Ok(format!("max (metas + constraints) / size = {:.2}", worst))
}

/// Every Solved θ passes the post-hoc verification.
pub fn solution_typedness(corpus: &Corpus, runs: &[Run]) -> Result<String, String> {
    let mut solved = 0;
    for (case, r) in corpus.cases().zip(runs) {
        if r.result.outcome.is_solved() {
            verify_solution(&r.elab.signature, &corpus.defs, &r.elab.constraints, &r.result.outcome)
                .map_err(|e| format!("{}: {}", describe(case), e))?;
            solved += 1;
        }
    }
    Ok(format!("{} solutions verified", solved))
}

/// A substitution problem: replace `head` by `with` in `term`.
#[derive(Debug, Clone)]
pub struct Triple {
    pub ctx: Context,
    pub sig: Signature,
    pub term: Term,
    pub head: Head,
    pub with: Term,
}

/// A well-typed substitution triple. Variable, constant and meta heads are
/// drawn in turn.
pub fn triple(g: &mut Gen) -> Triple {
    loop {
        let case = g.case();
        let ctx = case.ctx.clone();
        match g.rng.gen_range(0..3) {
            0 if !ctx.is_empty() => {
                let j = g.rng.gen_range(0..ctx.len());
                let ty = lookup_var(&ctx, j).expect("index in range");
                let Some(with) = g.term(&ctx, &ty, 3) else { continue };
                return Triple {
                    ctx,
                    sig: Signature::new(),
                    term: case.term,
                    head: Head::Var(j),
                    with,
                };
            }
            1 => {
                let name = if g.rng.gen_bool(0.5) { "not" } else { "add" };
                let Some(def) = g.defs.get(&Ident::new(name)).cloned() else { unreachable!() };
                let Some(with) = g.term(&Context::new(), &def.ty, 3) else { continue };
                return Triple {
                    ctx,
                    sig: Signature::new(),
                    term: case.term,
                    head: Head::Def(Ident::new(name)),
                    with,
                };
            }
            _ => {
                // Turn `not` into a meta of the same type, then instantiate it.
                let mut sig = Signature::new();
                let not_ty = Term::arrow(Term::Bool, Term::Bool);
                let m: MetaId = sig.extend(not_ty.clone());
                let term = subst(&case.term, &Head::Def(Ident::new("not")), &Term::meta(m))
                    .expect("renaming a constant to a meta terminates");
                let Some(with) = g.term(&Context::new(), &not_ty, 3) else { continue };
                return Triple {
                    ctx,
                    sig,
                    term,
                    head: Head::Meta(m),
                    with,
                };
            }
        }
    }
}

pub fn substitution_normal(t: &Triple) -> Result<Term, String> {
    let out = subst(&t.term, &t.head, &t.with).map_err(|e| format!("{:?}: {}", t, e))?;
    match normal_form_violation(&out, t.ctx.len()) {
        None => Ok(out),
        Some(v) => Err(format!("{:?} produced {:?}: {:?}", t, out, v)),
    }
}

pub fn beta_normality(seed: u64, count: usize) -> Result<String, String> {
    let mut g = Gen::new(seed);
    for _ in 0..count {
        substitution_normal(&triple(&mut g))?;
    }
    Ok(format!("{} substitution outputs pass the scanner", count))
}
