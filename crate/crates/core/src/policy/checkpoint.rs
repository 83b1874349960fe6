//! Plain-text checkpoint format.
//!
//! ```text
//! pa2d-checkpoint 1
//! policy <state_dim> <hidden> <action_dim> <log_std_min> <log_std_max> <count>
//! <value>            (count lines)
//! critic <state_dim> <hidden> <objectives> <count>
//! <value>            (count lines)
//! ```
//!
//! Values are written in shortest round-trip exponent notation, so a saved
//! agent reloads bit-for-bit.

use std::fmt::Write as _;
use std::path::Path;

use super::{Agent, CriticParams, NetworkShape, PolicyParams};
use crate::{Error, Result};

pub const MAGIC: &str = "pa2d-checkpoint";
pub const VERSION: u32 = 1;

pub fn to_string(agent: &Agent) -> String {
    let p = &agent.policy;
    let c = &agent.critic;
    let mut s = format!("{MAGIC} {VERSION}\n");
    let _ = writeln!(
        s,
        "policy {} {} {} {:e} {:e} {}",
        p.shape.input,
        p.shape.hidden,
        p.shape.output,
        p.log_std_bounds.0,
        p.log_std_bounds.1,
        p.values.len()
    );
    for v in &p.values {
        let _ = writeln!(s, "{v:e}");
    }
    let _ = writeln!(
        s,
        "critic {} {} {} {}",
        c.shape.input,
        c.shape.hidden,
        c.shape.output,
        c.values.len()
    );
    for v in &c.values {
        let _ = writeln!(s, "{v:e}");
    }
    s
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        let (i, line) = self
            .inner
            .next()
            .ok_or_else(|| bad(format!("unexpected end of file, expected {what}")))?;
        Ok((i + 1, line.split_whitespace().collect()))
    }

    fn values(&mut self, count: usize) -> Result<Vec<f64>> {
        (0..count)
            .map(|_| {
                let (ln, tok) = self.next("a value")?;
                match tok.as_slice() {
                    [v] => v
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| bad(format!("line {ln}: invalid value `{v}`"))),
                    _ => Err(bad(format!("line {ln}: expected one value"))),
                }
            })
            .collect()
    }
}

fn parse_num<T: std::str::FromStr>(ln: usize, tok: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| bad(format!("line {ln}: cannot parse `{tok}`")))
}

pub fn from_str(text: &str) -> Result<Agent> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (_, header) = lines.next("header")?;
    match header.as_slice() {
        [MAGIC, v] if *v == VERSION.to_string() => {}
        _ => return Err(bad(format!("not a {MAGIC} {VERSION} file"))),
    }

    let (ln, tok) = lines.next("policy header")?;
    let policy = match tok.as_slice() {
        ["policy", i, h, o, lo, hi, n] => {
            let shape = NetworkShape {
                input: parse_num(ln, i)?,
                hidden: parse_num(ln, h)?,
                output: parse_num(ln, o)?,
            };
            let count: usize = parse_num(ln, n)?;
            if count != shape.num_params() + shape.output {
                return Err(bad(format!(
                    "line {ln}: policy shape needs {} values, header says {count}",
                    shape.num_params() + shape.output
                )));
            }
            PolicyParams {
                shape,
                log_std_bounds: (parse_num(ln, lo)?, parse_num(ln, hi)?),
                values: lines.values(count)?,
            }
        }
        _ => return Err(bad(format!("line {ln}: malformed policy header"))),
    };

    let (ln, tok) = lines.next("critic header")?;
    let critic = match tok.as_slice() {
        ["critic", i, h, o, n] => {
            let shape = NetworkShape {
                input: parse_num(ln, i)?,
                hidden: parse_num(ln, h)?,
                output: parse_num(ln, o)?,
            };
            let count: usize = parse_num(ln, n)?;
            if count != shape.num_params() {
                return Err(bad(format!(
                    "line {ln}: critic shape needs {} values, header says {count}",
                    shape.num_params()
                )));
            }
            CriticParams {
                shape,
                values: lines.values(count)?,
            }
        }
        _ => return Err(bad(format!("line {ln}: malformed critic header"))),
    };
    if policy.shape.input != critic.shape.input {
        return Err(bad("policy and critic disagree on the state dimension"));
    }
    Ok(Agent { policy, critic })
}

pub fn save(agent: &Agent, path: &Path) -> Result<()> {
    std::fs::write(path, to_string(agent)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Agent> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_str(&text)
}
