use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sarseg::bench::{benchmark, parse_algorithms, read_manifest, synthetic_suite, write_csv};
use sarseg::config::{read_config, resolve, Profile};
use sarseg::run::{export_phantom, run_segmentation, suffixed};
use sarseg::{imageio, CliError, CliResult};
use sarseg_core::solvers::Algorithm;
use sarseg_core::speckle::{Geometry, SpeckleSpec};

/// Two-phase segmentation of speckled (SAR-like) images.
///
/// Input images are 8-bit grayscale PGM (P2/P5) or PNG. Gray levels are
/// mapped to f = max(f, 1) before solving, since the data term takes
/// logarithms of local means.
///
/// Exit codes: 0 success, 2 usage or configuration error, 3 numeric
/// failure, 4 I/O error.
#[derive(Parser)]
#[command(name = "sarseg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic two-phase phantom as <out>_clean.pgm, <out>_noisy.pgm, <out>_mask.pgm.
    Phantom(PhantomArgs),
    /// Segment one image; prints `algorithm iterations seconds pp [dice]`.
    Segment(SegmentArgs),
    /// Run algorithms over a set of images and write a CSV table.
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
struct PhantomArgs {
    /// disk, two_disks, annulus or rectangle.
    #[arg(long, value_parser = parse_geometry)]
    geometry: Geometry,
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u32).range(3..))]
    size: u32,
    /// Number of looks L of the Gamma speckle.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    looks: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output path prefix.
    #[arg(long)]
    out: PathBuf,
}

/// Parameter sources shared by `segment` and `benchmark`.
#[derive(Args)]
struct ParamArgs {
    /// Built-in parameter set the config file and flags start from.
    #[arg(long, value_enum, default_value_t = Profile::Standard)]
    profile: Profile,
    /// `key = value` parameter file; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// ISEF scale of the edge detector.
    #[arg(long)]
    sigma: Option<f64>,
    /// Gaussian scale of the local-mean kernel.
    #[arg(long)]
    kernel_sigma: Option<f64>,
    /// log or linear.
    #[arg(long)]
    data_term: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    dt1: Option<f64>,
    #[arg(long)]
    dt2: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    means_update_every: Option<usize>,
}

impl ParamArgs {
    fn flags(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        let s = |v: Option<f64>| v.map(|x| x.to_string());
        push("mu", s(self.mu));
        push("beta", s(self.beta));
        push("eps", s(self.eps));
        push("sigma", s(self.sigma));
        push("kernel_sigma", s(self.kernel_sigma));
        push("data_term", self.data_term.clone());
        push("lambda", s(self.lambda));
        push("alpha", s(self.alpha));
        push("t", s(self.t));
        push("gamma", s(self.gamma));
        push("xi", s(self.xi));
        push("dt1", s(self.dt1));
        push("dt2", s(self.dt2));
        push("max_iter", self.max_iter.map(|v| v.to_string()));
        push("tol", s(self.tol));
        push("means_update_every", self.means_update_every.map(|v| v.to_string()));
        out
    }

    fn config_for(&self, algorithm: Algorithm) -> CliResult<sarseg_core::solvers::SolverConfig> {
        let file = match &self.config {
            Some(p) => read_config(p)?,
            None => Vec::new(),
        };
        resolve(algorithm, self.profile, &file, &self.flags())
    }
}

#[derive(Args)]
struct SegmentArgs {
    /// rdls, sbrd, fprd1 or fprd2.
    #[arg(long, value_parser = parse_algorithm)]
    alg: Algorithm,
    #[arg(long = "in")]
    input: PathBuf,
    /// Ground-truth mask; adds dice to the summary.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Output path prefix for _mask.pgm, _phi.pgm and _overlay.png.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Generate this many phantoms instead of reading a manifest.
    #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
    synthetic: Option<usize>,
    /// Lines of `image_id path [truth_path]`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, default_value = "rdls,sbrd,fprd1,fprd2")]
    algs: String,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    looks: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u32).range(3..))]
    size: u32,
    #[arg(long, default_value_t = 5)]
    repeat: usize,
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    params: ParamArgs,
}

fn parse_geometry(s: &str) -> Result<Geometry, String> {
    Geometry::from_name(s).ok_or_else(|| format!("unknown geometry `{s}`"))
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    Algorithm::from_name(s).ok_or_else(|| format!("unknown algorithm `{s}`"))
}

fn phantom(args: PhantomArgs) -> CliResult<()> {
    let spec = SpeckleSpec::new(args.looks, args.seed);
    export_phantom(&args.out, args.geometry, args.size as usize, spec)?;
    Ok(())
}

fn segment(args: SegmentArgs) -> CliResult<()> {
    let cfg = args.params.config_for(args.alg)?;
    let f = imageio::read_image(&args.input)?;
    let truth = args.truth.as_deref().map(imageio::read_mask).transpose()?;
    if let Some(t) = &truth {
        if t.shape() != f.shape() {
            return Err(CliError::Usage(format!(
                "truth mask is {:?} but the image is {:?}",
                t.shape(),
                f.shape()
            )));
        }
    }
    let res = run_segmentation(&f, truth.as_ref(), &cfg)?;
    imageio::write_pgm(&suffixed(&args.out, "_mask.pgm"), &imageio::mask_to_gray(&res.mask), false)?;
    imageio::write_pgm(&suffixed(&args.out, "_phi.pgm"), &imageio::phi_to_gray(&res.phi), false)?;
    imageio::write_png(&suffixed(&args.out, "_overlay.png"), &imageio::overlay(&f, &res.mask))?;
    let mut line = format!("{} {} {:.6} {:.6}", cfg.algorithm, res.iterations, res.wall_seconds, res.pp);
    if let Some(d) = res.dice {
        line.push_str(&format!(" {d:.6}"));
    }
    println!("{line}");
    Ok(())
}

fn bench(args: BenchmarkArgs) -> CliResult<()> {
    let algorithms = parse_algorithms(&args.algs)?;
    let configs = algorithms.iter().map(|&a| args.params.config_for(a)).collect::<CliResult<Vec<_>>>()?;
    let images = match (&args.manifest, args.synthetic) {
        (Some(m), _) => read_manifest(m)?,
        (None, Some(0)) => return Err(CliError::Usage("--synthetic needs at least one image".into())),
        (None, Some(n)) => synthetic_suite(n, args.size as usize, args.looks, args.seed)?,
        (None, None) => unreachable!("clap requires one of --synthetic and --manifest"),
    };
    let records = benchmark(&images, &configs, args.repeat)?;
    let file = File::create(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    write_csv(BufWriter::new(file), &records).map_err(|e| CliError::io(&args.out, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Phantom(a) => phantom(a),
        Command::Segment(a) => segment(a),
        Command::Benchmark(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
