//! External solvers driven through LP files and solution files.

use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use regex::Regex;

use super::lp::write_lp;
use super::model::{MilpModel, VarKind};
use super::MilpError;

/// Absolute tolerance used to accept a solver assignment.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-6;

const SOLVER_ENV: &str = "MOLINFER_SOLVER";
const HIGHS_OPTIONS: &str =
    "mip_feasibility_tolerance = 1e-9\nprimal_feasibility_tolerance = 1e-9\noutput_flag = false\n";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionFormat {
    Highs,
    Cbc,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveStatus {
    Optimal,
    /// A verified solution without a proof of optimality (time limit hit).
    Feasible,
    Infeasible,
    Timeout,
    SolverError(String),
}

impl SolveStatus {
    pub fn has_solution(&self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::Feasible)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// One value per variable, in declaration order; empty without a solution.
    pub values: Vec<f64>,
    pub objective: Option<f64>,
    /// Tail of the solver's console output.
    pub log_digest: String,
    pub seconds: f64,
}

/// Anything that can decide a [`MilpModel`].
pub trait MilpSolver: Sync {
    fn solve(&self, model: &MilpModel) -> Result<SolveResult, MilpError>;
}

/// How to run an LP-file solver.
///
/// Argument templates may use `{lp}`, `{sol}`, `{timelimit}` and `{dir}`
/// (the per-call working directory).
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub executable: PathBuf,
    pub args: Vec<String>,
    pub format: SolutionFormat,
    /// Seconds handed to the solver.
    pub time_limit: f64,
    /// Extra files written to the working directory before each call.
    pub files: Vec<(String, String)>,
}

impl SolverConfig {
    pub fn highs(executable: impl Into<PathBuf>) -> Self {
        Self {
            executable: executable.into(),
            args: [
                "--model_file",
                "{lp}",
                "--solution_file",
                "{sol}",
                "--options_file",
                "{dir}/highs.opt",
                "--time_limit",
                "{timelimit}",
            ]
            .map(String::from)
            .to_vec(),
            format: SolutionFormat::Highs,
            time_limit: 60.0,
            files: vec![("highs.opt".into(), HIGHS_OPTIONS.into())],
        }
    }

    pub fn cbc(executable: impl Into<PathBuf>) -> Self {
        Self {
            executable: executable.into(),
            args: ["{lp}", "sec", "{timelimit}", "solve", "solu", "{sol}"]
                .map(String::from)
                .to_vec(),
            format: SolutionFormat::Cbc,
            time_limit: 60.0,
            files: Vec::new(),
        }
    }

    /// Preset chosen by the executable's file name (`cbc` or anything else
    /// meaning HiGHS).
    pub fn for_executable(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_ascii_lowercase();
        if stem.contains("cbc") {
            Self::cbc(path)
        } else {
            Self::highs(path)
        }
    }

    /// `$MOLINFER_SOLVER`, then `highs` and `cbc` on `PATH`.
    pub fn discover() -> Result<Self, MilpError> {
        if let Some(p) = std::env::var_os(SOLVER_ENV) {
            let path = PathBuf::from(p);
            return match resolve_executable(&path) {
                Some(found) => Ok(Self::for_executable(found)),
                None => Err(MilpError::SolverNotFound(path.display().to_string())),
            };
        }
        for name in ["highs", "cbc"] {
            if let Some(found) = resolve_executable(Path::new(name)) {
                return Ok(Self::for_executable(found));
            }
        }
        Err(MilpError::SolverNotFound(format!(
            "no `highs` or `cbc` on PATH and {SOLVER_ENV} unset"
        )))
    }

    pub fn with_time_limit(mut self, seconds: f64) -> Self {
        self.time_limit = seconds;
        self
    }

    fn expand(&self, arg: &str, dir: &Path, lp: &Path, sol: &Path) -> String {
        arg.replace("{lp}", &lp.display().to_string())
            .replace("{sol}", &sol.display().to_string())
            .replace("{timelimit}", &format!("{}", self.time_limit))
            .replace("{dir}", &dir.display().to_string())
    }
}

fn resolve_executable(path: &Path) -> Option<PathBuf> {
    if path.components().count() > 1 {
        return path.is_file().then(|| path.to_path_buf());
    }
    std::env::var_os("PATH").and_then(|paths| {
        std::env::split_paths(&paths)
            .map(|d| d.join(path))
            .find(|p| p.is_file())
    })
}

impl MilpSolver for SolverConfig {
    fn solve(&self, model: &MilpModel) -> Result<SolveResult, MilpError> {
        let start = Instant::now();
        let text = write_lp(model)?;
        let dir = tempfile::Builder::new().prefix("molinfer-milp").tempdir()?;
        let lp = dir.path().join("model.lp");
        let sol = dir.path().join("model.sol");
        std::fs::write(&lp, text)?;
        for (name, contents) in &self.files {
            std::fs::write(dir.path().join(name), contents)?;
        }
        let args: Vec<String> = self
            .args
            .iter()
            .map(|a| self.expand(a, dir.path(), &lp, &sol))
            .collect();
        let log_path = dir.path().join("solver.log");
        let log_file = std::fs::File::create(&log_path)?;
        let mut child = Command::new(&self.executable)
            .args(&args)
            .current_dir(dir.path())
            .stdin(Stdio::null())
            .stdout(log_file.try_clone()?)
            .stderr(log_file)
            .spawn()
            .map_err(|e| MilpError::SolverNotFound(format!("{}: {e}", self.executable.display())))?;

        // the solver enforces the limit itself; this only guards against hangs
        let guard = Duration::from_secs_f64(self.time_limit + 30.0);
        let exit = loop {
            if let Some(status) = child.try_wait()? {
                break Some(status);
            }
            if start.elapsed() > guard {
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            std::thread::sleep(Duration::from_millis(5));
        };
        let log = std::fs::read_to_string(&log_path).unwrap_or_default();
        let log_digest = tail(&log, 20);
        let seconds = start.elapsed().as_secs_f64();
        let Some(exit) = exit else {
            return Ok(SolveResult {
                status: SolveStatus::Timeout,
                values: Vec::new(),
                objective: None,
                log_digest,
                seconds,
            });
        };
        let solution = match std::fs::read_to_string(&sol) {
            Ok(s) => s,
            Err(_) => {
                return Ok(SolveResult {
                    status: SolveStatus::SolverError(format!("no solution file ({exit})")),
                    values: Vec::new(),
                    objective: None,
                    log_digest,
                    seconds,
                })
            }
        };
        let parsed = match self.format {
            SolutionFormat::Highs => parse_highs(&solution, model),
            SolutionFormat::Cbc => parse_cbc(&solution, model),
        }?;
        let mut result = finish(parsed, model);
        result.log_digest = log_digest;
        result.seconds = seconds;
        Ok(result)
    }
}

fn tail(text: &str, lines: usize) -> String {
    let all: Vec<&str> = text.lines().collect();
    all[all.len().saturating_sub(lines)..].join("\n")
}

/// Raw outcome read from a solution file, before verification.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSolution {
    pub status: SolveStatus,
    pub values: Option<Vec<f64>>,
}

/// Snaps integer variables, re-verifies every constraint and bound, and
/// downgrades to a solver error when the assignment does not check out.
pub fn finish(parsed: ParsedSolution, model: &MilpModel) -> SolveResult {
    let mut result = SolveResult {
        status: parsed.status,
        values: Vec::new(),
        objective: None,
        log_digest: String::new(),
        seconds: 0.0,
    };
    let Some(mut values) = parsed.values else {
        if result.status.has_solution() {
            result.status = SolveStatus::SolverError("solver reported a solution but none was parsed".into());
        }
        return result;
    };
    for (v, var) in values.iter_mut().zip(model.variables()) {
        if var.kind != VarKind::Continuous && (*v - v.round()).abs() <= FEASIBILITY_TOLERANCE {
            *v = v.round();
        }
        if *v == 0.0 {
            *v = 0.0;
        }
    }
    let (amount, place) = model.max_violation(&values);
    if amount > FEASIBILITY_TOLERANCE {
        result.status = SolveStatus::SolverError(format!(
            "solution fails verification: {place} violated by {amount:e}"
        ));
        return result;
    }
    if result.status == SolveStatus::Timeout {
        result.status = SolveStatus::Feasible;
    }
    result.objective = model.objective_value(&values);
    result.values = values;
    result
}

fn parse_error(message: impl Into<String>) -> MilpError {
    MilpError::SolutionParse(message.into())
}

pub fn parse_highs(text: &str, model: &MilpModel) -> Result<ParsedSolution, MilpError> {
    let mut lines = text.lines();
    let mut status_text = None;
    while let Some(l) = lines.next() {
        if l.trim() == "Model status" {
            status_text = lines.next().map(str::trim);
            break;
        }
    }
    let status = match status_text.ok_or_else(|| parse_error("missing `Model status`"))? {
        "Optimal" => SolveStatus::Optimal,
        "Infeasible" => SolveStatus::Infeasible,
        "Time limit reached" => SolveStatus::Timeout,
        other => SolveStatus::SolverError(format!("solver status `{other}`")),
    };
    let mut values = None;
    let columns = Regex::new(r"^# Columns (\d+)$").unwrap();
    let mut in_primal = false;
    let mut feasible = false;
    while let Some(l) = lines.next() {
        let l = l.trim();
        if l == "# Primal solution values" {
            in_primal = true;
            continue;
        }
        if in_primal && l == "Feasible" {
            feasible = true;
        }
        if let (true, Some(c)) = (in_primal && feasible, columns.captures(l)) {
            let count: usize = c[1].parse().map_err(|_| parse_error("bad column count"))?;
            let mut v = vec![f64::NAN; model.var_count()];
            for _ in 0..count {
                let row = lines.next().ok_or_else(|| parse_error("truncated column list"))?;
                let (name, value) = row
                    .trim()
                    .rsplit_once(' ')
                    .ok_or_else(|| parse_error(format!("bad column line `{row}`")))?;
                let value: f64 = value
                    .parse()
                    .map_err(|_| parse_error(format!("bad value in `{row}`")))?;
                if let Some(id) = model.var_by_name(name) {
                    v[id.0] = value;
                }
            }
            if v.iter().any(|x| x.is_nan()) {
                return Err(parse_error("solution omits declared variables"));
            }
            values = Some(v);
            break;
        }
    }
    Ok(ParsedSolution { status, values })
}

pub fn parse_cbc(text: &str, model: &MilpModel) -> Result<ParsedSolution, MilpError> {
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| parse_error("empty CBC solution"))?.trim();
    let status = if first.starts_with("Optimal") {
        SolveStatus::Optimal
    } else if first.starts_with("Infeasible") || first.starts_with("Integer infeasible") {
        SolveStatus::Infeasible
    } else if first.starts_with("Stopped on time") {
        SolveStatus::Timeout
    } else {
        SolveStatus::SolverError(format!("solver status `{first}`"))
    };
    let has_values = status == SolveStatus::Optimal || first.contains("objective value");
    if !has_values {
        return Ok(ParsedSolution { status, values: None });
    }
    let row = Regex::new(r"^\s*(?:\*\*)?\s*\d+\s+(\S+)\s+(\S+)").unwrap();
    let mut v = vec![0.0; model.var_count()];
    for l in lines {
        if let Some(c) = row.captures(l) {
            if let Some(id) = model.var_by_name(&c[1]) {
                v[id.0] = c[2]
                    .parse()
                    .map_err(|_| parse_error(format!("bad value in `{l}`")))?;
            }
        }
    }
    Ok(ParsedSolution {
        status,
        values: Some(v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::Sense;

    fn model() -> MilpModel {
        let mut m = MilpModel::new();
        let x = m.add_binary("x").unwrap();
        let y = m.add_continuous("y", 0.0, 10.0).unwrap();
        m.add_constraint("c1", vec![(x, 1.0), (y, 1.0)], Sense::Ge, 2.5).unwrap();
        m
    }

    #[test]
    fn highs_solution_file() {
        let text = "Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective 0\n\
                    # Columns 2\nx 0.9999999999\ny 1.5\n# Rows 1\nc1 2.5\n";
        let r = finish(parse_highs(text, &model()).unwrap(), &model());
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.values, vec![1.0, 1.5]);
        let text = "Model status\nInfeasible\n\n# Primal solution values\nNone\n";
        let r = finish(parse_highs(text, &model()).unwrap(), &model());
        assert_eq!(r.status, SolveStatus::Infeasible);
    }

    #[test]
    fn verification_rejects_bad_assignments() {
        let text = "Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective 0\n\
                    # Columns 2\nx 0\ny 1.5\n";
        let r = finish(parse_highs(text, &model()).unwrap(), &model());
        assert!(matches!(r.status, SolveStatus::SolverError(_)));
        let text = "Model status\nOptimal\n\n# Primal solution values\nFeasible\n# Columns 1\nx 1\n";
        assert!(parse_highs(text, &model()).is_err());
    }

    #[test]
    fn timeout_with_verified_incumbent_is_feasible() {
        let text = "Model status\nTime limit reached\n\n# Primal solution values\nFeasible\n\
                    # Columns 2\nx 1\ny 2\n";
        let r = finish(parse_highs(text, &model()).unwrap(), &model());
        assert_eq!(r.status, SolveStatus::Feasible);
        let text = "Model status\nTime limit reached\n\n# Primal solution values\nNone\n";
        let r = finish(parse_highs(text, &model()).unwrap(), &model());
        assert_eq!(r.status, SolveStatus::Timeout);
    }

    #[test]
    fn cbc_solution_file() {
        let text = "Optimal - objective value 0.00000000\n      1 y                    1.5       0\n";
        let r = finish(parse_cbc(text, &model()).unwrap(), &model());
        assert!(matches!(r.status, SolveStatus::SolverError(_)));
        let text = "Optimal - objective value 0.00000000\n      0 x  1  0\n      1 y    1.5       0\n";
        let r = finish(parse_cbc(text, &model()).unwrap(), &model());
        assert_eq!(r.values, vec![1.0, 1.5]);
        let r = parse_cbc("Infeasible - objective value 0\n", &model()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
    }

    #[test]
    fn template_expansion() {
        let c = SolverConfig::highs("/usr/bin/highs").with_time_limit(12.5);
        let a = c.expand("{dir}/highs.opt", Path::new("/tmp/w"), Path::new("/tmp/w/m.lp"), Path::new("s"));
        assert_eq!(a, "/tmp/w/highs.opt");
        assert_eq!(c.expand("{timelimit}", Path::new(""), Path::new(""), Path::new("")), "12.5");
        assert_eq!(SolverConfig::for_executable("/opt/cbc").format, SolutionFormat::Cbc);
    }
}
