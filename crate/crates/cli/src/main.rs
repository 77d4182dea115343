//! `natle`: batch low-light enhancement.
//!
//! ```text
//! natle enhance dark/*.png --out-dir out --trace
//! natle ablate dark/*.png --out-dir ablation --refs high/
//! natle eval out/ high/
//! ```

mod config;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use natle::denoise::estimate_local_sigma;
use natle::metrics::SsimConfig;
use natle::pipeline::EnhancementTrace;
use natle::raster::{init_illumination, save_planar};
use natle::{enhance_traced, load_image, psnr, save_image, ssim, NatleParams, Psnr, RgbImage};
use rayon::prelude::*;

const REPORT_HEADER: [&str; 8] = [
    "file", "width", "height", "ms_illum", "ms_denoise", "ms_reflect", "ms_total", "warnings",
];

#[derive(Parser, Debug)]
#[command(name = "natle", version, about = "Noise-aware retinex enhancement for low-light images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enhance images and write a CSV report
    Enhance(RunArgs),
    /// Run the α=0, β=0, no-denoise and default configurations side by side
    Ablate {
        #[command(flatten)]
        run: RunArgs,
        /// Directory of reference images matched by file stem
        #[arg(long)]
        refs: Option<PathBuf>,
    },
    /// Compare enhanced outputs against references (SSIM, PSNR)
    Eval {
        outputs: PathBuf,
        refs: PathBuf,
        /// Where to write the metrics CSV (default: <OUTPUTS>/metrics.csv)
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Input images
    inputs: Vec<PathBuf>,

    #[arg(long, default_value = "out")]
    out_dir: PathBuf,

    /// Flat key = value parameter file; flags win on conflict
    #[arg(long)]
    config: Option<PathBuf>,

    /// Print the effective configuration and exit
    #[arg(long)]
    dump_config: bool,

    /// Write per-stage panels next to each output
    #[arg(long)]
    trace: bool,

    #[command(flatten)]
    params: ParamFlags,
}

#[derive(Args, Debug, Default)]
struct ParamFlags {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Gradient floor of the illumination weights
    #[arg(long)]
    eps: Option<f64>,
    /// Small-gradient threshold of the target gradient map
    #[arg(long = "eps-g")]
    eps_g: Option<f64>,
    #[arg(long)]
    median_radius: Option<usize>,
    #[arg(long)]
    abf_spatial_sigma: Option<f64>,
    #[arg(long)]
    abf_range_min: Option<f64>,
    #[arg(long)]
    abf_range_max: Option<f64>,
    /// Skip the reflectance denoising round-trip
    #[arg(long)]
    no_denoise: bool,
    /// Relative residual tolerance of the linear solves
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
}

impl ParamFlags {
    fn apply(&self, p: &mut NatleParams) {
        if let Some(v) = self.alpha {
            p.illumination.alpha = v;
        }
        if let Some(v) = self.beta {
            p.reflectance.beta = v;
        }
        if let Some(v) = self.lambda {
            p.reflectance.lambda = v;
        }
        if let Some(v) = self.gamma {
            p.gamma = v;
        }
        if let Some(v) = self.eps {
            p.illumination.eps = v;
        }
        if let Some(v) = self.eps_g {
            p.reflectance.eps_g = v;
        }
        if let Some(v) = self.median_radius {
            p.denoise.median_radius = v;
        }
        if let Some(v) = self.abf_spatial_sigma {
            p.denoise.abf_spatial_sigma = v;
        }
        if let Some(v) = self.abf_range_min {
            p.denoise.abf_range_sigma_min = v;
        }
        if let Some(v) = self.abf_range_max {
            p.denoise.abf_range_sigma_max = v;
        }
        if self.no_denoise {
            p.denoise_enabled = false;
        }
        if let Some(v) = self.tol {
            p.solver.rel_tolerance = v;
        }
        if let Some(v) = self.max_iters {
            p.solver.max_iterations = v;
        }
    }
}

impl RunArgs {
    fn effective_params(&self) -> Result<NatleParams> {
        let mut p = NatleParams::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            config::apply(&mut p, &text).with_context(|| format!("in {}", path.display()))?;
        }
        self.params.apply(&mut p);
        p.validate()?;
        Ok(p)
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into())
}

fn ms(d: std::time::Duration) -> String {
    format!("{:.3}", d.as_secs_f64() * 1e3)
}

struct Processed {
    output: RgbImage,
    trace: EnhancementTrace,
}

fn write_trace(dir: &Path, input: &RgbImage, done: &Processed) -> Result<()> {
    let Some(maps) = &done.trace.maps else {
        return Ok(());
    };
    fs::create_dir_all(dir)?;
    save_image(dir.join("1_input.png"), input)?;
    save_planar(dir.join("2_lhat.png"), &maps.lhat)?;
    save_planar(dir.join("3_illumination.png"), &maps.l)?;
    save_planar(dir.join("4_rhat_noisy.png"), &maps.rhat_noisy)?;
    save_planar(dir.join("4b_rhat_denoised.png"), &maps.rhat)?;
    save_planar(dir.join("5_reflectance.png"), &maps.r)?;
    save_image(dir.join("6_output.png"), &done.output)?;
    Ok(())
}

fn process_one(
    path: &Path,
    params: &NatleParams,
    out_path: &Path,
    trace_dir: Option<&Path>,
) -> Result<(RgbImage, Processed)> {
    let input = load_image(path)?;
    let (output, trace) = enhance_traced(&input, params, trace_dir.is_some())?;
    for w in &trace.warnings {
        log::warn!("{}: {w}", path.display());
    }
    save_image(out_path, &output)?;
    let done = Processed { output, trace };
    if let Some(dir) = trace_dir {
        write_trace(dir, &input, &done)?;
    }
    Ok((input, done))
}

fn report_row(path: &Path, res: &Result<(RgbImage, Processed)>) -> Vec<String> {
    let file = path.display().to_string();
    match res {
        Ok((input, done)) => {
            let t = &done.trace.timings;
            vec![
                file,
                input.width().to_string(),
                input.height().to_string(),
                ms(t.illumination),
                ms(t.denoise),
                ms(t.reflectance),
                ms(t.total),
                done.trace.warnings.join("; "),
            ]
        }
        Err(e) => {
            let mut row = vec![file];
            row.extend(std::iter::repeat(String::new()).take(6));
            row.push(format!("error: {e:#}"));
            row
        }
    }
}

fn run_enhance(args: &RunArgs) -> Result<bool> {
    let params = args.effective_params()?;
    if args.dump_config {
        print!("{}", config::dump(&params));
        return Ok(true);
    }
    if args.inputs.is_empty() {
        bail!("no input images given");
    }
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;

    let results: Vec<_> = args
        .inputs
        .par_iter()
        .map(|path| {
            let name = stem(path);
            let out_path = args.out_dir.join(format!("{name}.png"));
            let trace_dir = args.trace.then(|| args.out_dir.join(format!("{name}.trace")));
            process_one(path, &params, &out_path, trace_dir.as_deref())
        })
        .collect();

    let report_path = args.out_dir.join("report.csv");
    let mut wtr = csv::Writer::from_path(&report_path)
        .with_context(|| format!("creating {}", report_path.display()))?;
    wtr.write_record(REPORT_HEADER)?;
    let mut ok = true;
    for (path, res) in args.inputs.iter().zip(&results) {
        if let Err(e) = res {
            eprintln!("error: {}: {e:#}", path.display());
            ok = false;
        }
        wtr.write_record(report_row(path, res))?;
    }
    wtr.flush()?;
    let done = results.iter().filter(|r| r.is_ok()).count();
    eprintln!(
        "enhanced {done}/{} images; report at {}",
        results.len(),
        report_path.display()
    );
    Ok(ok)
}

const ABLATIONS: [&str; 4] = ["alpha0", "beta0", "nodenoise", "full"];

fn ablation_params(base: &NatleParams, name: &str) -> NatleParams {
    let mut p = *base;
    match name {
        "alpha0" => p.illumination.alpha = 0.0,
        "beta0" => p.reflectance.beta = 0.0,
        "nodenoise" => p.denoise_enabled = false,
        _ => {}
    }
    p
}

fn list_images(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
            .unwrap_or(false);
        if is_image {
            out.insert(stem(&path), path);
        }
    }
    Ok(out)
}

fn run_ablate(args: &RunArgs, refs: Option<&Path>) -> Result<bool> {
    let base = args.effective_params()?;
    if args.dump_config {
        print!("{}", config::dump(&base));
        return Ok(true);
    }
    if args.inputs.is_empty() {
        bail!("no input images given");
    }
    fs::create_dir_all(&args.out_dir)?;
    let references = refs.map(list_images).transpose()?;
    let noise_radius = base.denoise.noise_window_radius;

    let rows: Vec<Result<Vec<Vec<String>>>> = args
        .inputs
        .par_iter()
        .map(|path| -> Result<Vec<Vec<String>>> {
            let name = stem(path);
            let input = load_image(path)?;
            let reference = match references.as_ref().and_then(|r| r.get(&name)) {
                Some(p) => Some(load_image(p)?),
                None => None,
            };
            let mut rows = Vec::new();
            for config in ABLATIONS {
                let params = ablation_params(&base, config);
                let (output, _) = enhance_traced(&input, &params, false)?;
                save_image(args.out_dir.join(format!("{name}_{config}.png")), &output)?;
                let luma = init_illumination(&output);
                let sigma = estimate_local_sigma(&luma, noise_radius).mean();
                let score = match &reference {
                    Some(r) => format!("{:.6}", ssim(&output, r, &SsimConfig::default())?),
                    None => String::new(),
                };
                rows.push(vec![
                    path.display().to_string(),
                    config.to_string(),
                    format!("{:.6}", output.mean()),
                    format!("{sigma:.6}"),
                    score,
                ]);
            }
            Ok(rows)
        })
        .collect();

    let table = args.out_dir.join("ablation.csv");
    let mut wtr = csv::Writer::from_path(&table)?;
    wtr.write_record(["file", "config", "mean_brightness", "mean_local_sigma", "ssim"])?;
    let mut ok = true;
    for (path, res) in args.inputs.iter().zip(rows) {
        match res {
            Ok(rows) => {
                for row in rows {
                    println!("{}", row.join("\t"));
                    wtr.write_record(&row)?;
                }
            }
            Err(e) => {
                eprintln!("error: {}: {e:#}", path.display());
                ok = false;
            }
        }
    }
    wtr.flush()?;
    Ok(ok)
}

fn run_eval(outputs: &Path, refs: &Path, csv_path: Option<&Path>) -> Result<bool> {
    let outs = list_images(outputs)?;
    let references = list_images(refs)?;
    if outs.is_empty() {
        bail!("no images in {}", outputs.display());
    }
    let missing_ref: Vec<_> = outs.keys().filter(|k| !references.contains_key(*k)).collect();
    let missing_out: Vec<_> = references.keys().filter(|k| !outs.contains_key(*k)).collect();
    if !missing_ref.is_empty() || !missing_out.is_empty() {
        bail!(
            "unmatched files: without reference {:?}; without output {:?}",
            missing_ref,
            missing_out
        );
    }

    let scored: Vec<Result<(String, f64, Psnr)>> = outs
        .par_iter()
        .map(|(name, out_path)| {
            let a = load_image(out_path)?;
            let b = load_image(&references[name])?;
            Ok((name.clone(), ssim(&a, &b, &SsimConfig::default())?, psnr(&a, &b)?))
        })
        .collect();
    let scored = scored.into_iter().collect::<Result<Vec<_>>>()?;

    let csv_path = csv_path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| outputs.join("metrics.csv"));
    let mut wtr = csv::Writer::from_path(&csv_path)?;
    wtr.write_record(["file", "ssim", "psnr"])?;
    println!("{:<24} {:>8} {:>10}", "file", "ssim", "psnr");
    for (name, s, p) in &scored {
        println!("{name:<24} {s:>8.4} {:>10}", p.to_string());
        wtr.write_record([name.clone(), format!("{s:.6}"), p.to_string()])?;
    }
    let n = scored.len() as f64;
    let mean_ssim = scored.iter().map(|(_, s, _)| s).sum::<f64>() / n;
    let mean_psnr = scored.iter().map(|(_, _, p)| p.value()).sum::<f64>() / n;
    println!("{:<24} {mean_ssim:>8.4} {mean_psnr:>10.4}", "mean");
    wtr.write_record([
        "mean".to_string(),
        format!("{mean_ssim:.6}"),
        format!("{mean_psnr:.4}"),
    ])?;
    wtr.flush()?;
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Enhance(args) => run_enhance(args),
        Command::Ablate { run, refs } => run_ablate(run, refs.as_deref()),
        Command::Eval { outputs, refs, csv } => run_eval(outputs, refs, csv.as_deref()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
