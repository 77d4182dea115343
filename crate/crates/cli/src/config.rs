//! Flat `key = value` run configuration, one key per `NatleParams` field.

use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use natle::{NatleParams, Preconditioner};

/// Keys in dump order.
pub const KEYS: &[&str] = &[
    "alpha",
    "eps",
    "beta",
    "lambda",
    "eps_g",
    "epsilon_div",
    "ratio_cap",
    "denoise",
    "median_radius",
    "abf_spatial_sigma",
    "abf_range_min",
    "abf_range_max",
    "abf_window_radius",
    "noise_window_radius",
    "gamma",
    "tol",
    "max_iters",
    "preconditioner",
];

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => bail!("expected a boolean, got `{v}`"),
    }
}

pub fn set(params: &mut NatleParams, key: &str, value: &str) -> Result<()> {
    let f = || -> Result<f64> {
        value
            .parse::<f64>()
            .with_context(|| format!("`{key}` expects a number, got `{value}`"))
    };
    let u = || -> Result<usize> {
        value
            .parse::<usize>()
            .with_context(|| format!("`{key}` expects a non-negative integer, got `{value}`"))
    };
    match key {
        "alpha" => params.illumination.alpha = f()?,
        "eps" => params.illumination.eps = f()?,
        "beta" => params.reflectance.beta = f()?,
        "lambda" => params.reflectance.lambda = f()?,
        "eps_g" => params.reflectance.eps_g = f()?,
        "epsilon_div" => params.reflectance.epsilon_div = f()?,
        "ratio_cap" => params.reflectance.ratio_cap = f()?,
        "denoise" => params.denoise_enabled = parse_bool(value)?,
        "median_radius" => params.denoise.median_radius = u()?,
        "abf_spatial_sigma" => params.denoise.abf_spatial_sigma = f()?,
        "abf_range_min" => params.denoise.abf_range_sigma_min = f()?,
        "abf_range_max" => params.denoise.abf_range_sigma_max = f()?,
        "abf_window_radius" => params.denoise.abf_window_radius = u()?,
        "noise_window_radius" => params.denoise.noise_window_radius = u()?,
        "gamma" => params.gamma = f()?,
        "tol" => params.solver.rel_tolerance = f()?,
        "max_iters" => params.solver.max_iterations = u()?,
        "preconditioner" => {
            params.solver.preconditioner = match value {
                "jacobi" => Preconditioner::Jacobi,
                "none" => Preconditioner::None,
                _ => bail!("`preconditioner` expects `jacobi` or `none`, got `{value}`"),
            }
        }
        _ => bail!("unknown config key `{key}` (known: {})", KEYS.join(", ")),
    }
    Ok(())
}

/// Apply a config text on top of `params`. Blank lines and `#` comments are
/// ignored.
pub fn apply(params: &mut NatleParams, text: &str) -> Result<()> {
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected `key = value`", lineno + 1))?;
        set(params, key.trim(), value.trim()).with_context(|| format!("line {}", lineno + 1))?;
    }
    Ok(())
}

#[cfg(test)]
pub fn parse(text: &str) -> Result<NatleParams> {
    let mut params = NatleParams::default();
    apply(&mut params, text)?;
    Ok(params)
}

/// Floats use `{:?}`, which prints the shortest representation that parses
/// back to the same bits.
pub fn dump(p: &NatleParams) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    line("alpha", format!("{:?}", p.illumination.alpha));
    line("eps", format!("{:?}", p.illumination.eps));
    line("beta", format!("{:?}", p.reflectance.beta));
    line("lambda", format!("{:?}", p.reflectance.lambda));
    line("eps_g", format!("{:?}", p.reflectance.eps_g));
    line("epsilon_div", format!("{:?}", p.reflectance.epsilon_div));
    line("ratio_cap", format!("{:?}", p.reflectance.ratio_cap));
    line("denoise", p.denoise_enabled.to_string());
    line("median_radius", p.denoise.median_radius.to_string());
    line("abf_spatial_sigma", format!("{:?}", p.denoise.abf_spatial_sigma));
    line("abf_range_min", format!("{:?}", p.denoise.abf_range_sigma_min));
    line("abf_range_max", format!("{:?}", p.denoise.abf_range_sigma_max));
    line("abf_window_radius", p.denoise.abf_window_radius.to_string());
    line("noise_window_radius", p.denoise.noise_window_radius.to_string());
    line("gamma", format!("{:?}", p.gamma));
    line("tol", format!("{:?}", p.solver.rel_tolerance));
    line("max_iters", p.solver.max_iterations.to_string());
    line(
        "preconditioner",
        match p.solver.preconditioner {
            Preconditioner::Jacobi => "jacobi".into(),
            Preconditioner::None => "none".into(),
        },
    );
    out
}
