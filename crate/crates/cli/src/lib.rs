//! `eorders`: command-line front end for the edge-ordered graph toolkit.
//!
//! Every subcommand is deterministic given its inputs and `--seed`; machine
//! summary lines are prefixed `#=` with key=value pairs. Exit codes: 0 for
//! found/arrows/pass, 1 for a negative verdict, 2 for budget exhaustion,
//! 64 usage, 65 parse/input, 66 infeasible size.

pub mod acceptance;
mod commands;
mod pipeline;

use std::io::Write;

pub mod exit_code {
    pub const OK: i32 = 0;
    pub const NEGATIVE: i32 = 1;
    pub const BUDGET: i32 = 2;
    pub const USAGE: i32 = 64;
    pub const PARSE: i32 = 65;
    pub const INFEASIBLE: i32 = 66;
}

/// A command failure carrying its exit code.
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn parse(msg: impl Into<String>) -> Self {
        Self {
            code: exit_code::PARSE,
            message: msg.into(),
        }
    }

    pub fn infeasible(msg: impl Into<String>) -> Self {
        Self {
            code: exit_code::INFEASIBLE,
            message: msg.into(),
        }
    }

    pub fn budget() -> Self {
        Self {
            code: exit_code::BUDGET,
            message: "budget-exhausted".into(),
        }
    }
}

/// Run the CLI against explicit argv and streams. Returns the exit code.
pub fn run(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    commands::run(argv, out, err)
}

/// Parse a rational given as `P/Q`, a decimal like `0.25`, or an integer.
pub fn parse_rational(s: &str) -> Result<num_rational::BigRational, String> {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.parse().map_err(|_| format!("bad numerator {num:?}"))?;
        let d: BigInt = den.parse().map_err(|_| format!("bad denominator {den:?}"))?;
        if d == BigInt::from(0) {
            return Err("zero denominator".into());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let whole_sign = whole.starts_with('-');
        let w: BigInt = if whole.is_empty() || whole == "-" {
            BigInt::from(0)
        } else {
            whole.parse().map_err(|_| format!("bad number {s:?}"))?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("bad number {s:?}"));
        }
        let f: BigInt = frac.parse().map_err(|_| format!("bad number {s:?}"))?;
        let scale = BigInt::from(10).pow(frac.len() as u32);
        let mag = w.magnitude().clone() * scale.magnitude() + f.magnitude();
        let signed = if whole_sign {
            -BigInt::from(mag)
        } else {
            BigInt::from(mag)
        };
        return Ok(BigRational::new(signed, scale));
    }
    let n: BigInt = s.parse().map_err(|_| format!("bad number {s:?}"))?;
    Ok(BigRational::from(n))
}
