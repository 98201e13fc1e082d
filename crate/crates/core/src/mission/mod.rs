//! Mission language and design synthesis.
//!
//! ```text
//! # deliver and come back
//! FORWARD 1.0; DROP
//! RETURN
//! ```
//!
//! Statements are separated by newlines or `;`, keywords are case-insensitive,
//! `TURN` angles are degrees with positive meaning left, and `FORWARD`
//! distances are body lengths.

mod synth;

use std::fmt;

use thiserror::Error;

pub use synth::{
    candidate_from_config, emit_design, rescore, score_run, synthesize, synthesize_with, DesignCandidate,
    MaterialChoice, MuscleChoice, PairChoice, SynthesisOptions, SynthesisReport, ANGLE_WEIGHT_DEG, INFEASIBLE_SCORE,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Statement {
    /// Distance in body lengths.
    Forward(f64),
    /// Heading change in degrees, positive to the left.
    Turn(f64),
    Drop,
    Return,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mission {
    pub statements: Vec<Statement>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MissionError {
    #[error("line {line}, col {col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("mission is infeasible: best score {best:.6} is not below {threshold}")]
    Infeasible { best: f64, threshold: f64 },
    #[error("no candidate design passes the actuation predicates")]
    NoCandidates,
    #[error(transparent)]
    Scenario(#[from] crate::scenario::ScenarioError),
}

impl Mission {
    pub fn has_drop(&self) -> bool {
        self.statements.contains(&Statement::Drop)
    }

    pub fn has_return(&self) -> bool {
        self.statements.contains(&Statement::Return)
    }

    /// Same mission with every turn reversed.
    pub fn mirrored(&self) -> Self {
        Self {
            statements: self
                .statements
                .iter()
                .map(|s| match *s {
                    Statement::Turn(a) => Statement::Turn(-a),
                    other => other,
                })
                .collect(),
        }
    }
}

impl fmt::Display for Mission {
    /// One statement per line; floats use the shortest exact representation.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            match s {
                Statement::Forward(d) => writeln!(f, "FORWARD {d:?}")?,
                Statement::Turn(a) => writeln!(f, "TURN {a:?}")?,
                Statement::Drop => writeln!(f, "DROP")?,
                Statement::Return => writeln!(f, "RETURN")?,
            }
        }
        Ok(())
    }
}

fn err(line: usize, col: usize, message: impl Into<String>) -> MissionError {
    MissionError::Parse {
        line,
        col,
        message: message.into(),
    }
}

/// Whitespace-separated tokens with 1-based character columns.
fn tokens(segment: &str, col0: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (ci, (bi, ch)) in segment.char_indices().enumerate() {
        if ch.is_whitespace() {
            if let Some((sc, sb)) = start.take() {
                out.push((col0 + sc, &segment[sb..bi]));
            }
        } else if start.is_none() {
            start = Some((ci, bi));
        }
    }
    if let Some((sc, sb)) = start {
        out.push((col0 + sc, &segment[sb..]));
    }
    out
}

fn number(
    line: usize,
    col: usize,
    tok: Option<&(usize, &str)>,
    end_col: usize,
    what: &str,
) -> Result<f64, MissionError> {
    let Some(&(c, text)) = tok else {
        return Err(err(line, end_col, format!("expected {what}")));
    };
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(err(line, c.max(col), format!("malformed number `{text}`"))),
    }
}

pub fn parse(text: &str) -> Result<Mission, MissionError> {
    let mut statements = Vec::new();
    let mut seen_drop = false;
    let mut seen_return = false;
    for (li, raw) in text.lines().enumerate() {
        let line = li + 1;
        let body = raw.split('#').next().unwrap_or("");
        let mut col0 = 1;
        for segment in body.split(';') {
            let toks = tokens(segment, col0);
            let end_col = col0 + segment.chars().count();
            col0 = end_col + 1;
            let Some(&(kcol, kw)) = toks.first() else {
                continue;
            };
            if seen_return {
                return Err(err(line, kcol, "RETURN must be the last statement"));
            }
            let stmt = match kw.to_ascii_uppercase().as_str() {
                "FORWARD" => {
                    let d = number(line, kcol, toks.get(1), end_col, "a distance in body lengths")?;
                    if d <= 0.0 {
                        return Err(err(line, toks[1].0, "FORWARD distance must be positive"));
                    }
                    Statement::Forward(d)
                }
                "TURN" => Statement::Turn(number(line, kcol, toks.get(1), end_col, "an angle in degrees")?),
                "DROP" => {
                    if seen_drop {
                        return Err(err(line, kcol, "DROP may appear only once"));
                    }
                    seen_drop = true;
                    Statement::Drop
                }
                "RETURN" => {
                    seen_return = true;
                    Statement::Return
                }
                _ => return Err(err(line, kcol, format!("unknown keyword `{kw}`"))),
            };
            let arity = if matches!(stmt, Statement::Forward(_) | Statement::Turn(_)) {
                2
            } else {
                1
            };
            if let Some(&(c, extra)) = toks.get(arity) {
                return Err(err(line, c, format!("unexpected `{extra}`")));
            }
            statements.push(stmt);
        }
    }
    if statements.is_empty() {
        return Err(err(1, 1, "mission is empty"));
    }
    Ok(Mission { statements })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(parse("FORWARD 1.0").unwrap().statements, [Statement::Forward(1.0)]);
        assert_eq!(
            parse("forward 0.5; turn 23").unwrap().statements,
            [Statement::Forward(0.5), Statement::Turn(23.0)]
        );
        assert_eq!(
            parse("TURN abc"),
            Err(MissionError::Parse {
                line: 1,
                col: 6,
                message: "malformed number `abc`".into()
            })
        );
    }

    #[test]
    fn comments_and_layout() {
        let m = parse("# header\n  Forward 1 # go\n\nDROP;return\n").unwrap();
        assert_eq!(
            m.statements,
            [Statement::Forward(1.0), Statement::Drop, Statement::Return]
        );
    }

    fn pos(text: &str) -> (usize, usize) {
        match parse(text) {
            Err(MissionError::Parse { line, col, .. }) => (line, col),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn errors_have_positions() {
        assert_eq!(pos("FORWARD 1; JUMP 2"), (1, 12));
        assert_eq!(pos("FORWARD"), (1, 8));
        assert_eq!(pos("TURN 5 6"), (1, 8));
        assert_eq!(pos("DROP\nDROP"), (2, 1));
        assert_eq!(pos("RETURN; FORWARD 1"), (1, 9));
        assert_eq!(pos("RETURN\nRETURN"), (2, 1));
        assert_eq!(pos("FORWARD -1"), (1, 9));
        assert_eq!(pos("FORWARD inf"), (1, 9));
        assert_eq!(pos("  # nothing\n;;"), (1, 1));
    }

    #[test]
    fn display_round_trips() {
        let m = parse("FORWARD 0.1; TURN -21.45; DROP; RETURN").unwrap();
        assert_eq!(parse(&m.to_string()).unwrap(), m);
        assert_eq!(m.mirrored().statements[1], Statement::Turn(21.45));
    }
}
