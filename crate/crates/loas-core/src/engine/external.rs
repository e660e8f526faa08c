//! Subprocess backend: serialize the program to a file, run the configured
//! command, and read the answer back in the conventional solver output format
//! (`Answer:` blocks, `Optimization:` lines, `UNSATISFIABLE`).

use std::io::Write;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use crate::error::EngineError;
use crate::parser::parse_ground_atom;
use crate::syntax::{Interpretation, Program};

use super::SolveResult;

static FILE_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Parses solver output: atoms come from the line after the last `Answer:`
/// marker, the cost from the last `Optimization:` line, and `UNSATISFIABLE`
/// anywhere means there is no answer set.
pub fn parse_solver_output(out: &str) -> Result<Option<SolveResult>, EngineError> {
    let mut answer_line: Option<&str> = None;
    let mut optimization: Option<i64> = None;
    let mut expect_atoms = false;
    let mut unsat = false;
    for line in out.lines() {
        let trimmed = line.trim();
        if expect_atoms && !trimmed.is_empty() {
            answer_line = Some(trimmed);
            expect_atoms = false;
            continue;
        }
        if trimmed.starts_with("Answer:") {
            expect_atoms = true;
        } else if let Some(rest) = trimmed.strip_prefix("Optimization:") {
            if let Some(first) = rest.split_whitespace().next() {
                optimization = first.parse::<i64>().ok();
            }
        } else if trimmed.contains("UNSATISFIABLE") {
            unsat = true;
        }
    }
    if unsat {
        return Ok(None);
    }
    let Some(atoms_line) = answer_line else {
        return Err(EngineError::ExternalSolver {
            code: None,
            transcript: format!("no answer or UNSATISFIABLE marker in output:\n{out}"),
        });
    };
    let mut answer_set = Interpretation::new();
    for token in atoms_line.split_whitespace() {
        let atom = parse_ground_atom(token).map_err(|e| EngineError::ExternalSolver {
            code: None,
            transcript: format!("unparseable atom {token}: {e}"),
        })?;
        answer_set.insert(atom);
    }
    Ok(Some(SolveResult { answer_set, optimality: optimization.unwrap_or(0) }))
}

pub(super) fn solve_external(
    command_template: &str,
    program: &Program,
    deadline: Option<Instant>,
    log: bool,
) -> Result<Option<SolveResult>, EngineError> {
    let path = std::env::temp_dir().join(format!(
        "loas-{}-{}.lp",
        std::process::id(),
        FILE_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let mut file = std::fs::File::create(&path).map_err(|e| EngineError::ExternalSolver {
        code: None,
        transcript: format!("cannot write program file: {e}"),
    })?;
    write!(file, "{program}").map_err(|e| EngineError::ExternalSolver {
        code: None,
        transcript: format!("cannot write program file: {e}"),
    })?;
    drop(file);

    let rendered = command_template.replace("{file}", &path.to_string_lossy());
    let mut parts = rendered.split_whitespace();
    let Some(bin) = parts.next() else {
        return Err(EngineError::ExternalSolver {
            code: None,
            transcript: "empty external command".into(),
        });
    };
    let child = Command::new(bin)
        .args(parts)
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn();
    let mut child = match child {
        Ok(c) => c,
        Err(e) => {
            let _ = std::fs::remove_file(&path);
            return Err(EngineError::ExternalSolver {
                code: None,
                transcript: format!("cannot spawn '{rendered}': {e}"),
            });
        }
    };

    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) => {
                if deadline.is_some_and(|d| Instant::now() > d) {
                    let _ = child.kill();
                    let _ = child.wait();
                    let _ = std::fs::remove_file(&path);
                    return Err(EngineError::Timeout);
                }
                std::thread::sleep(Duration::from_millis(2));
            }
            Err(e) => {
                let _ = std::fs::remove_file(&path);
                return Err(EngineError::ExternalSolver {
                    code: None,
                    transcript: format!("wait failed: {e}"),
                });
            }
        }
    }
    let output = child.wait_with_output().map_err(|e| EngineError::ExternalSolver {
        code: None,
        transcript: format!("cannot read output: {e}"),
    })?;
    let _ = std::fs::remove_file(&path);

    let stdout = String::from_utf8_lossy(&output.stdout);
    let stderr = String::from_utf8_lossy(&output.stderr);
    if log {
        eprintln!("external solver transcript ({rendered}):\n{stdout}{stderr}");
    }
    parse_solver_output(&stdout).map_err(|e| match e {
        EngineError::ExternalSolver { transcript, .. } => EngineError::ExternalSolver {
            code: output.status.code(),
            transcript: format!("{transcript}\nstderr:\n{stderr}"),
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_answer_and_optimization() {
        let out = "loas 0.1\nSolving...\nAnswer: 1\nas(1) in_h(r2) w(1,1,args(2,r2),1)\n\
                   Optimization: 5\nOPTIMUM FOUND\n";
        let r = parse_solver_output(out).unwrap().unwrap();
        assert_eq!(r.optimality, 5);
        assert_eq!(r.answer_set.len(), 3);
    }

    #[test]
    fn later_answers_win() {
        let out = "Answer: 1\na\nOptimization: 7\nAnswer: 2\nb c\nOptimization: 5\n";
        let r = parse_solver_output(out).unwrap().unwrap();
        assert_eq!(r.optimality, 5);
        assert_eq!(r.answer_set.len(), 2);
    }

    #[test]
    fn unsat_is_none() {
        assert_eq!(parse_solver_output("Solving...\nUNSATISFIABLE\n").unwrap(), None);
    }

    #[test]
    fn garbage_is_an_error() {
        assert!(matches!(
            parse_solver_output("segfault\n"),
            Err(EngineError::ExternalSolver { .. })
        ));
    }
}
