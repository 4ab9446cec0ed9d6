//! Command-line front end for the transform pipeline: sinogram computation,
//! forward/inverse transform, distances, interpolation, and the two-space
//! classification experiment.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rcdt_core::container::{encode_grid, load_representation, GridKind};
use rcdt_core::datasets::{
    gen_confound_classes, gen_synthetic_classes, ConfoundConfig, ConfoundFamily, ImageDataset,
    SynthConfig,
};
use rcdt_core::grid::DEFAULT_EPSILON_REL;
use rcdt_core::pgm::{encode_pgm, load_pgm};
use rcdt_core::pipeline::{compare_spaces, SpaceReport};
use rcdt_core::radon::{radon_forward, RadonConfig};
use rcdt_core::rcdt::{interpolate_pair, rcd_distance, rcdt_forward, rcdt_inverse, transform_distance};
use rcdt_core::{Error, Image, RcdtConfig, Result, Template};

#[derive(Parser)]
#[command(name = "rcdt", version, about = "Radon cumulative distribution transform toolkit")]
struct Cli {
    /// Seed for dataset generation and classifier training.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Number of projection angles over [0, 180) degrees.
    #[arg(long, global = true, default_value_t = 180)]
    angles: usize,

    /// Reference image: a PGM path, `builtin:gaussian`, or `builtin:disk`.
    #[arg(long, global = true, default_value = "builtin:gaussian")]
    template: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the sinogram of a PGM image and write it as a grid container.
    Radon {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Forward transform of a PGM image against the template.
    Transform {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Invert a stored transform back to a PGM image.
    Invert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Distance between two PGM images.
    Distance {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = DistanceMode::Rcd)]
        mode: DistanceMode,
    },
    /// Geodesic-style interpolation between two PGM images.
    Interpolate {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Interpolation weight in [0, 1]; 0 reproduces `a`.
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a dataset and compare pixel-space vs transform-space
    /// classification.
    Experiment {
        #[arg(long, value_enum, default_value_t = ExperimentKind::Synthetic)]
        kind: ExperimentKind,
        /// Samples per class.
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Gaussian width as a fraction of the grid.
        #[arg(long, default_value_t = 0.08)]
        sigma: f64,
        /// Square grid size in pixels.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long)]
        outdir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DistanceMode {
    /// Direct sliced transport distance between the two images.
    Rcd,
    /// Euclidean distance between their transforms against the template.
    Transform,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentKind {
    Synthetic,
    Confound,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("RCDT_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: RCDT_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    if cli.angles == 0 {
        return Err(Error::Domain("--angles must be at least 1".into()));
    }
    let config = RcdtConfig::with_angles(cli.angles);
    match &cli.command {
        Command::Radon { input, out } => {
            let image = load_density(input)?;
            let rc = RadonConfig::for_image(image.width(), image.height(), cli.angles)?;
            let sino = radon_forward(&image, &rc)?;
            let bytes =
                encode_grid(GridKind::Sinogram, sino.t_count(), sino.num_angles(), sino.values(), 0)?;
            write_atomic(out, &bytes)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Transform { input, out } => {
            let image = load_density(input)?;
            let template = resolve_template(&cli.template, image.width().max(image.height()), &config)?;
            let repr = rcdt_forward(&image, &template, &config)?;
            let bytes = encode_grid(
                GridKind::Representation,
                repr.t_count(),
                repr.num_angles(),
                repr.values(),
                repr.template_hash(),
            )?;
            write_atomic(out, &bytes)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Invert { input, out } => {
            let repr = load_representation(input)?;
            let template = template_for_representation(
                &cli.template,
                repr.t_count(),
                repr.template_hash(),
                &RcdtConfig { num_angles: repr.num_angles(), ..config },
            )?;
            let image = rcdt_inverse(
                &repr,
                &template,
                template.image().width(),
                template.image().height(),
            )?;
            write_atomic(out, &encode_pgm(&image, 65535)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Distance { a, b, mode } => {
            let (ia, ib) = (load_density(a)?, load_density(b)?);
            let d = match mode {
                DistanceMode::Rcd => rcd_distance(&ia, &ib, &config)?,
                DistanceMode::Transform => {
                    let template =
                        resolve_template(&cli.template, ia.width().max(ia.height()), &config)?;
                    let ra = rcdt_forward(&ia, &template, &config)?;
                    let rb = rcdt_forward(&ib, &template, &config)?;
                    transform_distance(&ra, &rb)?
                }
            };
            println!("{d:.6e}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Interpolate { a, b, alpha, out } => {
            let (ia, ib) = (load_density(a)?, load_density(b)?);
            let template = resolve_template(&cli.template, ia.width().max(ia.height()), &config)?;
            let ra = rcdt_forward(&ia, &template, &config)?;
            let rb = rcdt_forward(&ib, &template, &config)?;
            let mid = interpolate_pair(&ra, &rb, *alpha, &template, ia.width(), ia.height())?;
            write_atomic(out, &encode_pgm(&mid, 65535)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Experiment { kind, n, sigma, grid, folds, outdir } => {
            run_experiment(cli, &config, *kind, *n, *sigma, *grid, *folds, outdir)
        }
    }
}

/// Loads a PGM file and normalizes it to a unit-mass density.
fn load_density(path: &Path) -> Result<Image> {
    load_pgm(path)?.normalize_density(DEFAULT_EPSILON_REL)
}

fn resolve_template(spec: &str, grid: usize, config: &RcdtConfig) -> Result<Template> {
    match spec {
        "builtin:gaussian" => Template::builtin_gaussian(grid, config),
        "builtin:disk" => Template::builtin_disk(grid, config),
        path => Template::from_image(load_density(Path::new(path))?, config),
    }
}

/// Resolves the template for inversion. Builtin templates are parameterized
/// by grid size, which a stored transform does not carry; the size is
/// recovered by matching the offset count and the stored template hash.
fn template_for_representation(
    spec: &str,
    t_count: usize,
    hash: u64,
    config: &RcdtConfig,
) -> Result<Template> {
    if !spec.starts_with("builtin:") {
        return resolve_template(spec, 0, config);
    }
    for n in 4..=4096usize {
        let k = RadonConfig::for_image(n, n, config.num_angles)?.t_count;
        if k > t_count {
            break;
        }
        if k == t_count {
            let template = resolve_template(spec, n, config)?;
            if template.hash() == hash {
                return Ok(template);
            }
        }
    }
    Err(Error::TemplateMismatch { expected: hash, found: 0 })
}

/// Writes a file via a temporary in the same directory plus a rename, so a
/// crash never leaves a half-written artifact behind.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    std::io::Write::write_all(&mut tmp, bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_experiment(
    cli: &Cli,
    config: &RcdtConfig,
    kind: ExperimentKind,
    n: usize,
    sigma: f64,
    grid: usize,
    folds: usize,
    outdir: &Path,
) -> Result<ExitCode> {
    if folds < 2 {
        return Err(Error::Domain("--folds must be at least 2".into()));
    }
    let dataset = match kind {
        ExperimentKind::Synthetic => {
            gen_synthetic_classes(&SynthConfig { grid, sigma, n_per_class: n, seed: cli.seed })?
        }
        ExperimentKind::Confound => confound_dataset(grid, sigma, n, cli.seed)?,
    };

    std::fs::create_dir_all(outdir.join("dataset"))?;
    write_dataset(&dataset, outdir)?;

    let template = resolve_template(&cli.template, grid, config)?;
    let report = compare_spaces(&dataset, &template, config, folds, cli.seed)?;

    let mut results = String::from("space,mean_accuracy,std_dev\n");
    let mut projections = String::from("space,sample,label,discriminant,orthogonal\n");
    let mut cpv = String::from("space,components,cpv\n");
    for space in [&report.image, &report.rcdt] {
        append_space(space, &dataset.labels, &mut results, &mut projections, &mut cpv);
    }
    write_atomic(&outdir.join("results.csv"), results.as_bytes())?;
    write_atomic(&outdir.join("projections.csv"), projections.as_bytes())?;
    write_atomic(&outdir.join("cpv.csv"), cpv.as_bytes())?;

    println!("image-space mean accuracy: {:.4}", report.image.cv.mean_accuracy);
    println!("rcdt-space mean accuracy: {:.4}", report.rcdt.cv.mean_accuracy);
    if report.rcdt.cv.mean_accuracy < report.image.cv.mean_accuracy {
        eprintln!("transform space underperformed pixel space");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn append_space(
    space: &SpaceReport,
    labels: &[usize],
    results: &mut String,
    projections: &mut String,
    cpv: &mut String,
) {
    let _ = writeln!(
        results,
        "{},{:.6},{:.6}",
        space.space, space.cv.mean_accuracy, space.cv.std_dev
    );
    for (i, ((d, o), label)) in space.projections.iter().zip(labels).enumerate() {
        let _ = writeln!(projections, "{},{i},{label},{d:.6e},{o:.6e}", space.space);
    }
    for (k, v) in space.cpv.iter().enumerate() {
        let _ = writeln!(cpv, "{},{},{v:.6}", space.space, k + 1);
    }
}

/// Default mother images for the confound experiment: a centered blob and a
/// two-blob mixture, which are not related by any translation.
fn confound_dataset(grid: usize, sigma: f64, n: usize, seed: u64) -> Result<ImageDataset> {
    let g = grid as f64;
    let s = sigma * g;
    let blob = |x0: f64, y0: f64, sg: f64| -> Result<Image> {
        Image::from_fn(grid, grid, |i, j| {
            let c = (g - 1.0) / 2.0;
            let x = j as f64 - c;
            let y = c - i as f64;
            (-((x - x0).powi(2) + (y - y0).powi(2)) / (2.0 * sg * sg)).exp()
        })
    };
    let mother_a = blob(0.0, 0.0, s)?.normalize_density(DEFAULT_EPSILON_REL)?;
    let (dx, dy) = (0.11 * g, 0.05 * g);
    let p = blob(-dx, -dy, 0.8 * s)?;
    let q = blob(dx, dy, 0.8 * s)?;
    let mixed: Vec<f64> = p.pixels().iter().zip(q.pixels()).map(|(a, b)| 0.5 * (a + b)).collect();
    let mother_b =
        Image::new(grid, grid, mixed)?.normalize_density(DEFAULT_EPSILON_REL)?;
    gen_confound_classes(
        &mother_a,
        &mother_b,
        &ConfoundConfig {
            family: ConfoundFamily::Translation { max_shift: 8.0 },
            n_per_class: n,
            seed,
        },
    )
}

/// Writes every sample as a PGM file plus a manifest of labels and logged
/// generative parameters.
fn write_dataset(dataset: &ImageDataset, outdir: &Path) -> Result<()> {
    let mut manifest = String::from("filename,label,params\n");
    for (i, (image, label)) in dataset.images.iter().zip(&dataset.labels).enumerate() {
        let name = format!("sample_{i:04}.pgm");
        write_atomic(&outdir.join("dataset").join(&name), &encode_pgm(image, 65535)?)?;
        let params = dataset.params[i]
            .iter()
            .map(|p| format!("{p:.4}"))
            .collect::<Vec<_>>()
            .join(";");
        let _ = writeln!(manifest, "{name},{label},{params}");
    }
    write_atomic(&outdir.join("dataset").join("manifest.csv"), manifest.as_bytes())?;
    Ok(())
}
