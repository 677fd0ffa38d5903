//! Text formats for channels and run configuration.
//!
//! Both are line-oriented `key [index ...] = value ...` files. `#` starts a
//! comment. A channel file declares the alphabet sizes, the state prior,
//! one forward row `W(.|x,s)` per input-state pair, one feedback row
//! `P(.|y)` per output and optionally one distortion row `d(s,.)` per state
//! (Hamming when omitted):
//!
//! ```text
//! x = 2
//! s = 2
//! y = 2
//! z = 2
//! prior = 0.8 0.2
//! forward 0 0 = 1 0
//! forward 0 1 = 1 0
//! forward 1 0 = 1 0
//! forward 1 1 = 0 1
//! feedback 0 = 0.9 0.1
//! feedback 1 = 0.1 0.9
//! distortion 0 = 0 1
//! distortion 1 = 1 0
//! ```
//!
//! A configuration file uses the same syntax without indices, for example
//! `budget = 0.2` or `convention = robust`.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::bounds::{RhsMode, SolverConfig};
use crate::channel::{compose_channel, StateChannel};
use crate::error::{Error, Result};
use crate::prob::{Alphabet, CondKernel, Pmf, ROW_TOL};
use crate::sensing::DistortionFn;
use crate::sim::{AuxSource, Convention, ProtocolConfig};

/// One `key [index ...] = value ...` line.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub indices: Vec<usize>,
    pub values: Vec<String>,
}

fn parse_error<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        message: message.into(),
    })
}

pub fn parse_entries(text: &str) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((lhs, rhs)) = body.split_once('=') else {
            return parse_error(line, format!("expected `key = value`, found `{body}`"));
        };
        let mut head = lhs.split_whitespace();
        let Some(key) = head.next() else {
            return parse_error(line, "missing key before `=`");
        };
        let indices = head
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::Parse {
                        line,
                        message: format!("index `{t}` of `{key}` is not a nonnegative integer"),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        let values: Vec<String> = rhs.split_whitespace().map(str::to_string).collect();
        if values.is_empty() {
            return parse_error(line, format!("`{key}` has no value"));
        }
        out.push(Entry {
            line,
            key: key.to_ascii_lowercase(),
            indices,
            values,
        });
    }
    Ok(out)
}

fn numbers(e: &Entry) -> Result<Vec<f64>> {
    e.values
        .iter()
        .map(|v| {
            v.parse::<f64>().map_err(|_| Error::Parse {
                line: e.line,
                message: format!("`{v}` is not a number"),
            })
        })
        .collect()
}

fn probability_row(e: &Entry, width: usize, what: &str) -> Result<Vec<f64>> {
    let row = numbers(e)?;
    if row.len() != width {
        return parse_error(e.line, format!("{what} has {} entries, expected {width}", row.len()));
    }
    if let Some(v) = row.iter().find(|v| !(**v >= 0.0)) {
        return parse_error(e.line, format!("{what} has negative entry {v}"));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_TOL.max(1e-9) {
        return parse_error(e.line, format!("{what} sums to {sum}, not 1"));
    }
    Ok(row)
}

/// A parsed channel file.
#[derive(Debug, Clone)]
pub struct ChannelSpec {
    pub channel: StateChannel,
    pub distortion: DistortionFn,
}

pub fn parse_channel(text: &str) -> Result<ChannelSpec> {
    let entries = parse_entries(text)?;
    let last = text.lines().count().max(1);
    let mut sizes: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &entries {
        if let "x" | "s" | "y" | "z" = e.key.as_str() {
            if !e.indices.is_empty() || e.values.len() != 1 {
                return parse_error(e.line, format!("`{}` takes a single size", e.key));
            }
            let v: usize = e.values[0].parse().map_err(|_| Error::Parse {
                line: e.line,
                message: format!("size `{}` is not a positive integer", e.values[0]),
            })?;
            if v == 0 {
                return parse_error(e.line, format!("alphabet `{}` must be nonempty", e.key));
            }
            sizes.insert(e.key.as_str(), v);
        }
    }
    let size = |k: &str| -> Result<usize> {
        sizes.get(k).copied().ok_or_else(|| Error::Parse {
            line: last,
            message: format!("missing alphabet size `{k} = ...`"),
        })
    };
    let (nx, ns, ny, nz) = (size("x")?, size("s")?, size("y")?, size("z")?);
    let mut prior = None;
    let mut forward = vec![None; nx * ns];
    let mut feedback = vec![None; ny];
    let mut distortion = vec![None; ns];
    for e in &entries {
        let expect = |k: usize| -> Result<()> {
            if e.indices.len() != k {
                return parse_error(e.line, format!("`{}` takes {k} indices, found {}", e.key, e.indices.len()));
            }
            Ok(())
        };
        match e.key.as_str() {
            "x" | "s" | "y" | "z" => {}
            "prior" => {
                expect(0)?;
                prior = Some(probability_row(e, ns, "state prior")?);
            }
            "forward" => {
                expect(2)?;
                let (x, s) = (e.indices[0], e.indices[1]);
                if x >= nx || s >= ns {
                    return parse_error(e.line, format!("forward row x={x} s={s} is out of range"));
                }
                let what = format!("forward row W(.|x={x},s={s})");
                if forward[x * ns + s].is_some() {
                    return parse_error(e.line, format!("{what} is given twice"));
                }
                forward[x * ns + s] = Some(probability_row(e, ny, &what)?);
            }
            "feedback" => {
                expect(1)?;
                let y = e.indices[0];
                if y >= ny {
                    return parse_error(e.line, format!("feedback row y={y} is out of range"));
                }
                let what = format!("feedback row P(.|y={y})");
                if feedback[y].is_some() {
                    return parse_error(e.line, format!("{what} is given twice"));
                }
                feedback[y] = Some(probability_row(e, nz, &what)?);
            }
            "distortion" => {
                expect(1)?;
                let s = e.indices[0];
                if s >= ns {
                    return parse_error(e.line, format!("distortion row s={s} is out of range"));
                }
                let row = numbers(e)?;
                if row.len() != ns {
                    return parse_error(e.line, format!("distortion row s={s} needs {ns} entries"));
                }
                distortion[s] = Some(row);
            }
            other => return parse_error(e.line, format!("unknown key `{other}`")),
        }
    }
    let prior = prior.ok_or_else(|| Error::Parse {
        line: last,
        message: "missing `prior = ...`".into(),
    })?;
    let mut w = Vec::with_capacity(nx * ns * ny);
    for (k, row) in forward.into_iter().enumerate() {
        match row {
            Some(r) => w.extend(r),
            None => return parse_error(last, format!("missing forward row x={} s={}", k / ns, k % ns)),
        }
    }
    let mut f = Vec::with_capacity(ny * nz);
    for (y, row) in feedback.into_iter().enumerate() {
        match row {
            Some(r) => f.extend(r),
            None => return parse_error(last, format!("missing feedback row y={y}")),
        }
    }
    let d = if distortion.iter().all(Option::is_none) {
        DistortionFn::hamming(ns)
    } else {
        let mut t = Vec::with_capacity(ns * ns);
        for (s, row) in distortion.into_iter().enumerate() {
            match row {
                Some(r) => t.extend(r),
                None => return parse_error(last, format!("missing distortion row s={s}")),
            }
        }
        DistortionFn::new(ns, t)?
    };
    let (ax, as_, ay, az) = (
        Alphabet::new("X", nx)?,
        Alphabet::new("S", ns)?,
        Alphabet::new("Y", ny)?,
        Alphabet::new("Z", nz)?,
    );
    let fwd = CondKernel::new(vec![ax, as_.clone()], ay.clone(), w)?;
    let fb = CondKernel::new(vec![ay], az, f)?;
    let channel = compose_channel(&fwd, &fb, &Pmf::new(as_, prior)?)?;
    Ok(ChannelSpec { channel, distortion: d })
}

pub fn load_channel(path: &Path) -> Result<ChannelSpec> {
    parse_channel(&std::fs::read_to_string(path)?)
}

/// Writes a channel in the format read by [`parse_channel`].
pub fn format_channel(ch: &StateChannel, d: &DistortionFn) -> String {
    let (nx, ns, ny, nz) = (ch.x().size(), ch.s().size(), ch.y().size(), ch.z().size());
    let join = |v: Vec<f64>| v.iter().map(|p| format!("{p}")).collect::<Vec<_>>().join(" ");
    let mut out = format!("x = {nx}\ns = {ns}\ny = {ny}\nz = {nz}\n");
    out += &format!("prior = {}\n", join(ch.prior().probs().to_vec()));
    for x in 0..nx {
        for s in 0..ns {
            let row = (0..ny).map(|y| (0..nz).map(|z| ch.w(y, z, x, s)).sum()).collect();
            out += &format!("forward {x} {s} = {}\n", join(row));
        }
    }
    for y in 0..ny {
        let row = (0..nz)
            .map(|z| {
                (0..nx * ns)
                    .find_map(|k| {
                        let (x, s) = (k / ns, k % ns);
                        let py: f64 = (0..nz).map(|zz| ch.w(y, zz, x, s)).sum();
                        (py > 0.0).then(|| ch.w(y, z, x, s) / py)
                    })
                    .unwrap_or(if z == y.min(nz - 1) { 1.0 } else { 0.0 })
            })
            .collect();
        out += &format!("feedback {y} = {}\n", join(row));
    }
    for s in 0..ns {
        out += &format!("distortion {s} = {}\n", join(d.table()[s * ns..(s + 1) * ns].to_vec()));
    }
    out
}

/// Key-value settings with the line each came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub values: BTreeMap<String, (usize, String)>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for e in parse_entries(text)? {
            if !e.indices.is_empty() {
                return parse_error(e.line, format!("configuration key `{}` takes no indices", e.key));
            }
            values.insert(e.key, (e.line, e.values.join(" ")));
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<T>().map(Some).map_err(|_| Error::Parse {
                line: *line,
                message: format!("invalid value `{v}` for `{key}`"),
            }),
        }
    }

    /// Fails on the first key not in `known`.
    pub fn check_known(&self, known: &[&str]) -> Result<()> {
        for (k, (line, _)) in &self.values {
            if !known.contains(&k.as_str()) {
                return parse_error(*line, format!("unknown configuration key `{k}`"));
            }
        }
        Ok(())
    }
}

pub const PROTOCOL_KEYS: &[&str] = &[
    "budget",
    "n",
    "sqrt_block",
    "hash_range",
    "messages",
    "trials",
    "seed",
    "epsilon",
    "gamma",
    "bin_gamma",
    "convention",
    "blocks",
    "satellite_cap",
    "ambiguity_threshold",
    "aux",
    "aux_alphabet",
    "identical_maps",
    "lambda1_target",
    "lambda2_target",
];

pub const SOLVER_KEYS: &[&str] = &[
    "u_alphabet_size",
    "restarts",
    "grid_resolution",
    "ascent_steps",
    "initial_step",
    "solver_seed",
    "constraint_margin",
    "rhs_mode",
    "ba_tol",
    "ba_max_iter",
    "gate_tol",
];

macro_rules! apply {
    ($s:expr, $cfg:expr, $($key:literal => $field:ident),* $(,)?) => {
        $(if let Some(v) = $s.get($key)? {
            $cfg.$field = v;
        })*
    };
}

pub fn apply_protocol(s: &Settings, cfg: &mut ProtocolConfig) -> Result<()> {
    apply!(s, cfg,
        "budget" => budget,
        "n" => n,
        "hash_range" => hash_range,
        "messages" => messages,
        "trials" => trials,
        "seed" => seed,
        "epsilon" => epsilon,
        "gamma" => gamma,
        "blocks" => blocks,
        "satellite_cap" => satellite_cap,
        "ambiguity_threshold" => ambiguity_threshold,
        "aux_alphabet" => aux_alphabet,
        "identical_maps" => identical_maps,
        "lambda1_target" => lambda1_target,
        "lambda2_target" => lambda2_target,
    );
    if let Some(v) = s.get::<usize>("sqrt_block")? {
        cfg.sqrt_block = Some(v);
    }
    if let Some(v) = s.get::<f64>("bin_gamma")? {
        cfg.bin_gamma = Some(v);
    }
    if let Some(v) = s.get::<Convention>("convention")? {
        cfg.convention = v;
    }
    if let Some(v) = s.get::<AuxSource>("aux")? {
        cfg.aux = v;
    }
    Ok(())
}

pub fn apply_solver(s: &Settings, cfg: &mut SolverConfig) -> Result<()> {
    apply!(s, cfg,
        "restarts" => restarts,
        "grid_resolution" => grid_resolution,
        "ascent_steps" => ascent_steps,
        "initial_step" => initial_step,
        "solver_seed" => seed,
        "constraint_margin" => constraint_margin,
        "ba_tol" => ba_tol,
        "ba_max_iter" => ba_max_iter,
        "gate_tol" => gate_tol,
    );
    if let Some(v) = s.get::<usize>("u_alphabet_size")? {
        cfg.u_alphabet_size = Some(v);
    }
    if let Some(v) = s.get::<RhsMode>("rhs_mode")? {
        cfg.rhs_mode = v;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary::{build_binary_channel, BinaryExampleParams};

    #[test]
    fn round_trip_of_the_binary_example() {
        let (ch, d) = build_binary_channel(&BinaryExampleParams::new(0.2, 0.1).unwrap()).unwrap();
        let text = format_channel(&ch, &d);
        let back = parse_channel(&text).unwrap();
        for x in 0..2 {
            for s in 0..2 {
                for y in 0..2 {
                    for z in 0..2 {
                        assert!((back.channel.w(y, z, x, s) - ch.w(y, z, x, s)).abs() < 1e-15);
                    }
                }
            }
        }
        assert_eq!(back.distortion, d);
    }

    #[test]
    fn non_stochastic_row_names_line_and_row() {
        let text = "x = 2\ns = 1\ny = 2\nz = 2\nprior = 1\nforward 0 0 = 1 0\nforward 1 0 = 0.5 0.4\nfeedback 0 = 1 0\nfeedback 1 = 0 1\n";
        let e = parse_channel(text).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 7") && msg.contains("x=1,s=0"), "{msg}");
    }

    #[test]
    fn missing_rows_and_unknown_keys() {
        let e = parse_channel("x = 1\ns = 1\ny = 1\nz = 1\nprior = 1\nfeedback 0 = 1\n").unwrap_err();
        assert!(e.to_string().contains("missing forward row"), "{e}");
        let e = parse_channel("x = 1\nbogus = 3\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn settings_override_defaults() {
        let s = Settings::parse("budget = 0.3\nconvention = robust\nsqrt_block = 5 # comment\nrestarts = 4\n").unwrap();
        let mut p = ProtocolConfig::default();
        apply_protocol(&s, &mut p).unwrap();
        assert_eq!((p.budget, p.convention, p.sqrt_block), (0.3, Convention::Robust, Some(5)));
        let mut c = SolverConfig::default();
        apply_solver(&s, &mut c).unwrap();
        assert_eq!(c.restarts, 4);
        let bad = Settings::parse("n = many\n").unwrap();
        let e = apply_protocol(&bad, &mut p).unwrap_err();
        assert!(e.to_string().contains("line 1"), "{e}");
    }
}
