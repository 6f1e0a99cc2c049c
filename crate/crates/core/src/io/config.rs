//! Flat `key = value` configuration files.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::StepSize;
use crate::tracker::TrackerConfig;

/// Tracker settings plus the resolution frames are resized to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tracker: TrackerConfig,
    /// `None` tracks at the source resolution.
    pub working: Option<(u32, u32)>,
}

pub const DEFAULT_WORKING: (u32, u32) = (320, 240);

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tracker: TrackerConfig::default(),
            working: Some(DEFAULT_WORKING),
        }
    }
}

/// Every accepted key, in the order [`format_config`] writes them.
pub const CONFIG_KEYS: &[&str] = &[
    "particles",
    "templates",
    "lambda",
    "gamma",
    "alpha",
    "sigma",
    "tol",
    "max_iter",
    "rel_cutoff",
    "std_x",
    "std_y",
    "std_s",
    "std_r",
    "similarity_threshold",
    "boost",
    "view_intensity",
    "view_color",
    "view_hog",
    "view_lbp",
    "illum",
    "illum_gamma",
    "illum_sigma_inner",
    "illum_sigma_outer",
    "illum_alpha",
    "illum_tau",
    "work_width",
    "work_height",
];

fn parse_value<T: FromStr>(key: &str, raw: &str, line: usize, origin: &Path) -> Result<T> {
    raw.parse().map_err(|_| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg: format!("bad value '{raw}' for {key}"),
    })
}

fn parse_bool(key: &str, raw: &str, line: usize, origin: &Path) -> Result<bool> {
    match raw.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Parse {
            path: origin.to_path_buf(),
            line,
            msg: format!("bad boolean '{raw}' for {key}"),
        }),
    }
}

/// Parses a config file body. Unspecified keys keep their defaults; unknown
/// keys, repeated keys and unparsable values are errors. A working size of
/// `0 x 0` means "keep the source resolution".
pub fn parse_config(text: &str, origin: &Path) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let (mut ww, mut wh) = DEFAULT_WORKING;
    let mut seen: Vec<&str> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let perr = |msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line: line_no,
            msg,
        };
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| perr("expected 'key = value'".into()))?;
        let Some(&key) = CONFIG_KEYS.iter().find(|k| **k == key) else {
            return Err(perr(format!("unknown key '{key}'")));
        };
        if seen.contains(&key) {
            return Err(perr(format!("key '{key}' given twice")));
        }
        seen.push(key);

        let t = &mut cfg.tracker;
        let (l, o) = (line_no, origin);
        match key {
            "particles" => t.particles = parse_value(key, value, l, o)?,
            "templates" => t.templates = parse_value(key, value, l, o)?,
            "lambda" => t.solver.lambda = parse_value(key, value, l, o)?,
            "gamma" => t.solver.gamma = parse_value(key, value, l, o)?,
            "alpha" => t.alpha = parse_value(key, value, l, o)?,
            "sigma" => t.solver.sigma = parse_value::<StepSize>(key, value, l, o)?,
            "tol" => t.solver.tol = parse_value(key, value, l, o)?,
            "max_iter" => t.solver.max_iter = parse_value(key, value, l, o)?,
            "rel_cutoff" => t.solver.rel_cutoff = parse_value(key, value, l, o)?,
            "std_x" => t.motion.std_x = parse_value(key, value, l, o)?,
            "std_y" => t.motion.std_y = parse_value(key, value, l, o)?,
            "std_s" => t.motion.std_s = parse_value(key, value, l, o)?,
            "std_r" => t.motion.std_r = parse_value(key, value, l, o)?,
            "similarity_threshold" => t.update.similarity_threshold = parse_value(key, value, l, o)?,
            "boost" => t.update.boost = parse_value(key, value, l, o)?,
            "view_intensity" => t.features.views.intensity = parse_bool(key, value, l, o)?,
            "view_color" => t.features.views.color_hist = parse_bool(key, value, l, o)?,
            "view_hog" => t.features.views.hog = parse_bool(key, value, l, o)?,
            "view_lbp" => t.features.views.lbp = parse_bool(key, value, l, o)?,
            "illum" => t.features.illum.enabled = parse_bool(key, value, l, o)?,
            "illum_gamma" => t.features.illum.gamma = parse_value(key, value, l, o)?,
            "illum_sigma_inner" => t.features.illum.sigma_inner = parse_value(key, value, l, o)?,
            "illum_sigma_outer" => t.features.illum.sigma_outer = parse_value(key, value, l, o)?,
            "illum_alpha" => t.features.illum.alpha = parse_value(key, value, l, o)?,
            "illum_tau" => t.features.illum.tau = parse_value(key, value, l, o)?,
            "work_width" => ww = parse_value(key, value, l, o)?,
            "work_height" => wh = parse_value(key, value, l, o)?,
            _ => unreachable!("key list and match arms agree"),
        }
    }
    cfg.working = match (ww, wh) {
        (0, 0) => None,
        (0, _) | (_, 0) => {
            return Err(Error::Config(
                "work_width and work_height must both be 0 or both positive".into(),
            ))
        }
        (w, h) => Some((w, h)),
    };
    cfg.tracker
        .validate()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(cfg)
}

pub fn read_config(path: &Path) -> Result<RunConfig> {
    parse_config(&std::fs::read_to_string(path)?, path)
}

/// Writes every key; `parse_config(format_config(c)) == c`.
pub fn format_config(cfg: &RunConfig) -> String {
    let t = &cfg.tracker;
    let sigma = match t.solver.sigma {
        StepSize::Auto => "auto".to_string(),
        StepSize::Fixed(s) => format!("{s:?}"),
    };
    let (ww, wh) = cfg.working.unwrap_or((0, 0));
    let il = &t.features.illum;
    let v = &t.features.views;
    let values: Vec<String> = vec![
        t.particles.to_string(),
        t.templates.to_string(),
        format!("{:?}", t.solver.lambda),
        format!("{:?}", t.solver.gamma),
        format!("{:?}", t.alpha),
        sigma,
        format!("{:?}", t.solver.tol),
        t.solver.max_iter.to_string(),
        format!("{:?}", t.solver.rel_cutoff),
        format!("{:?}", t.motion.std_x),
        format!("{:?}", t.motion.std_y),
        format!("{:?}", t.motion.std_s),
        format!("{:?}", t.motion.std_r),
        format!("{:?}", t.update.similarity_threshold),
        format!("{:?}", t.update.boost),
        v.intensity.to_string(),
        v.color_hist.to_string(),
        v.hog.to_string(),
        v.lbp.to_string(),
        il.enabled.to_string(),
        format!("{:?}", il.gamma),
        format!("{:?}", il.sigma_inner),
        format!("{:?}", il.sigma_outer),
        format!("{:?}", il.alpha),
        format!("{:?}", il.tau),
        ww.to_string(),
        wh.to_string(),
    ];
    let mut s = String::new();
    for (k, v) in CONFIG_KEYS.iter().zip(values) {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}
