//! Batch driver: parses, resolves and checks a file declaration by
//! declaration, threading one signature through the whole file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use metacheck_core::elaborate::elaborate_check;
use metacheck_core::normalize::{apply_meta_subst, Env};
use metacheck_core::pretty::show;
use metacheck_core::syntax::{Context, DefEnv, MetaId, MetaSubst, Signature, Term};
use metacheck_core::typecheck::{check, show_metas, TypeError};
use metacheck_core::unify::{solve_all, verify_solution, Outcome, SolveConfig, DEFAULT_MAX_STEPS};

use crate::ast::{Decl, Pos};
use crate::parser::parse;
use crate::scope::{resolve_decl, scope_check, CoreDecl, Resolver};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    pub dump_elaboration: bool,
    pub dump_solution: bool,
    pub trace_unify: bool,
    pub max_steps: usize,
    pub verify: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            dump_elaboration: false,
            dump_solution: false,
            trace_unify: false,
            max_steps: DEFAULT_MAX_STEPS,
            verify: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Ok,
    Stuck,
    IllTyped(String),
}

/// Outcome of one `check` declaration (or of a rejected definition).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub pos: Pos,
    pub status: Status,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub entries: Vec<Entry>,
    /// Syntax, scope or IO failure; no checking happened past it.
    pub fatal: Option<String>,
}

impl Report {
    /// 0 all OK, 1 any ill-typed, 2 any stuck, 3 syntax, scope or IO error.
    pub fn exit_code(&self) -> i32 {
        if self.fatal.is_some() {
            3
        } else if self.entries.iter().any(|e| matches!(e.status, Status::IllTyped(_))) {
            1
        } else if self.entries.iter().any(|e| e.status == Status::Stuck) {
            2
        } else {
            0
        }
    }
}

/// Reads and runs a file. Output goes to `out`, diagnostics to `err`.
pub fn run_file(path: &Path, opts: &Options, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<Report> {
    match std::fs::read_to_string(path) {
        Ok(src) => run(&path.display().to_string(), &src, opts, out, err),
        Err(e) => {
            let msg = format!("{}: cannot read file: {}", path.display(), e);
            writeln!(err, "{}", msg)?;
            Ok(Report {
                entries: Vec::new(),
                fatal: Some(msg),
            })
        }
    }
}

/// Runs source text; `name` labels diagnostics.
pub fn run(name: &str, src: &str, opts: &Options, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<Report> {
    let mut report = Report::default();
    let file = match parse(src) {
        Ok(f) => f,
        Err(e) => {
            let msg = format!("{}:{}", name, e);
            writeln!(err, "{}", msg)?;
            report.fatal = Some(msg);
            return Ok(report);
        }
    };
    // Resolve everything up front so scope errors stop the run before any
    // checking output.
    if let Err(e) = scope_check(&file) {
        let msg = format!("{}:{}", name, e);
        writeln!(err, "{}", msg)?;
        report.fatal = Some(msg);
        return Ok(report);
    }
    let mut session = Session {
        opts,
        out,
        defs: DefEnv::new(),
        sig: Signature::new(),
        theta: MetaSubst::new(),
        names: BTreeMap::new(),
        checks: 0,
    };
    let mut resolver = Resolver::new();
    for d in &file.decls {
        let pos = d.pos();
        let next = session.sig.next_id();
        let core = resolve_decl(&mut resolver, d, &mut || next).expect("the whole file resolved once already");
        if let Decl::Meta { name, .. } = d {
            session.names.insert(next, name.clone());
        }
        let status = session.declaration(core)?;
        let Some(status) = status else { continue };
        if let Status::IllTyped(msg) = &status {
            writeln!(err, "{}:{}: error: {}", name, pos, msg)?;
        }
        let definition_failed = matches!(status, Status::IllTyped(_)) && !matches!(d, Decl::Check { .. });
        report.entries.push(Entry { pos, status });
        if definition_failed {
            // Later declarations may depend on the rejected one.
            break;
        }
    }
    Ok(report)
}

struct Session<'a> {
    opts: &'a Options,
    out: &'a mut dyn Write,
    defs: DefEnv,
    /// Open metas: declared ones and those left by earlier checks.
    sig: Signature,
    /// Instantiations made so far in the file.
    theta: MetaSubst,
    names: BTreeMap<MetaId, String>,
    checks: usize,
}

fn type_error(what: &str, e: TypeError) -> Status {
    Status::IllTyped(format!("{}: {}", what, e))
}

impl Session<'_> {
    fn env(&self) -> Env<'_> {
        Env::new(&self.sig, &self.defs)
    }

    fn zonk(&self, t: &Term) -> Result<Term, String> {
        apply_meta_subst(&self.theta, t).map_err(|e| e.to_string())
    }

    #[allow(clippy::result_large_err)]
    fn is_type(&self, ty: &Term) -> Result<(), TypeError> {
        check(self.env(), &Context::new(), ty, &Term::Set)
    }

    /// Returns the status for checks and rejected declarations.
    fn declaration(&mut self, d: CoreDecl) -> io::Result<Option<Status>> {
        match d {
            CoreDecl::Postulate { name, ty } => {
                if let Err(e) = self.is_type(&ty) {
                    return Ok(Some(type_error(&format!("type of `{}`", name), e)));
                }
                self.defs.postulate(name.as_str(), ty);
                Ok(None)
            }
            CoreDecl::Define { name, ty, body } => {
                if let Err(e) = self.is_type(&ty) {
                    return Ok(Some(type_error(&format!("type of `{}`", name), e)));
                }
                if let Err(e) = check(self.env(), &Context::new(), &body, &ty) {
                    return Ok(Some(type_error(&format!("body of `{}`", name), e)));
                }
                self.defs.define(name.as_str(), ty, body);
                Ok(None)
            }
            CoreDecl::Meta { name, ty } => {
                let ty = match self.zonk(&ty) {
                    Ok(t) => t,
                    Err(e) => return Ok(Some(Status::IllTyped(e))),
                };
                if let Err(e) = self.is_type(&ty) {
                    return Ok(Some(type_error(&format!("type of meta `{}`", name), e)));
                }
                self.sig.extend(ty);
                Ok(None)
            }
            CoreDecl::Check { term, ty } => {
                self.checks += 1;
                let status = self.check(term, ty)?;
                Ok(Some(status))
            }
        }
    }

    fn check(&mut self, term: Term, ty: Term) -> io::Result<Status> {
        let k = self.checks;
        let (term, ty) = match (self.zonk(&term), self.zonk(&ty)) {
            (Ok(t), Ok(a)) => (t, a),
            (Err(e), _) | (_, Err(e)) => return self.finish(k, Status::IllTyped(e)),
        };
        match self.is_type(&ty) {
            Ok(()) => {}
            Err(TypeError::Blocked(ms)) => {
                writeln!(self.out, "check {}: stuck", k)?;
                writeln!(self.out, "  target type is blocked on {}", show_metas(&ms))?;
                return Ok(Status::Stuck);
            }
            Err(e) => return self.finish(k, type_error("target type", e)),
        }
        let elab = match elaborate_check(&self.sig, &self.defs, &Context::new(), &term, &ty) {
            Ok(e) => e,
            Err(e) => return self.finish(k, Status::IllTyped(e.to_string())),
        };
        if self.opts.dump_elaboration {
            let mut s = format!("-- elaboration of check {}\nmetas:\n", k);
            for (m, a) in elab.signature.iter().filter(|(m, _)| *m >= self.sig.next_id()) {
                let _ = writeln!(s, "  {} : {}", m, a);
            }
            s.push_str("constraints:\n");
            for c in elab.listing() {
                let _ = writeln!(s, "  {}", c.show());
            }
            let _ = writeln!(s, "term: {}", elab.term);
            self.out.write_all(s.as_bytes())?;
        }
        let config = SolveConfig {
            max_steps: self.opts.max_steps,
        };
        let mut trace = Vec::new();
        let trace_on = self.opts.trace_unify;
        let result = solve_all(&elab.signature, &self.defs, &elab.constraints, config, &mut |e| {
            if trace_on {
                trace.push(e.to_string());
            }
        });
        for line in &trace {
            writeln!(self.out, "{}", line)?;
        }
        if self.opts.verify {
            if let Err(e) = verify_solution(&elab.signature, &self.defs, &elab.constraints, &result.outcome) {
                return self.finish(k, Status::IllTyped(format!("verification failed: {}", e)));
            }
        }
        match &result.outcome {
            Outcome::Failed { failure, .. } => self.finish(k, Status::IllTyped(failure.to_string())),
            Outcome::Solved { theta, signature } | Outcome::Stuck { theta, signature, .. } => {
                for (m, v) in theta.iter() {
                    self.theta.insert(m, v.clone());
                }
                self.sig = signature.clone();
                let result_term = self.zonk(&elab.term).unwrap_or_else(|_| elab.term.clone());
                if self.opts.dump_solution {
                    let mut s = format!("-- solution of check {}\n", k);
                    for (m, v) in theta.iter() {
                        let _ = writeln!(s, "  {} := {}", m, v);
                    }
                    let _ = writeln!(s, "term: {}", result_term);
                    self.out.write_all(s.as_bytes())?;
                }
                if let Outcome::Stuck {
                    residuals,
                    step_limit_hit,
                    ..
                } = &result.outcome
                {
                    self.stuck(k, residuals, *step_limit_hit, &result_term)?;
                    Ok(Status::Stuck)
                } else {
                    self.finish(k, Status::Ok)
                }
            }
        }
    }

    fn stuck(
        &mut self,
        k: usize,
        residuals: &[metacheck_core::unify::Residual],
        step_limit_hit: bool,
        term: &Term,
    ) -> io::Result<()> {
        writeln!(self.out, "check {}: stuck", k)?;
        if step_limit_hit {
            writeln!(self.out, "  step limit of {} reached", self.opts.max_steps)?;
        }
        for r in residuals {
            writeln!(self.out, "  residual: {}", r.show())?;
        }
        for (m, a) in self.sig.iter() {
            match self.names.get(&m) {
                Some(n) => writeln!(self.out, "  unsolved: {} : {}  (declared as {})", m, a, n)?,
                None => writeln!(self.out, "  unsolved: {} : {}", m, a)?,
            }
        }
        writeln!(self.out, "  term: {}", show(term, &Context::new()))
    }

    fn finish(&mut self, k: usize, status: Status) -> io::Result<Status> {
        match &status {
            Status::Ok => writeln!(self.out, "check {}: ok", k)?,
            Status::Stuck => writeln!(self.out, "check {}: stuck", k)?,
            Status::IllTyped(_) => writeln!(self.out, "check {}: ill-typed", k)?,
        }
        Ok(status)
    }
}
