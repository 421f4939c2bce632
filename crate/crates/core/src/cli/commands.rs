use std::io::Write;
use std::net::{SocketAddr, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use super::*;
use crate::augment::{dedup_report, synthetic_corpus, AugmentPlan, CorpusSpec, DedupConfig, ImageBuffer};
use crate::bobproto::{
    serve_once, BatteryModel, ClockMode, DirectorySource, FrameSource, SceneScript, SimulatorConfig, NS_PER_SEC,
};
use crate::ems::{holding_tension, required_voltage, ElectricalParams, TensionCalibration};
use crate::regulations::{evaluate, parse_regulations, CatchContext, Decision, RegulationSet};
use crate::session::{parse_trace, replay, spawn_engine, CoreConfig, EngineCore, EngineOptions, SessionConfig};
use crate::vision::{BlobDetector, CameraIntrinsics, Detector, SidecarDetector, UniformDepth};

type CliResult = Result<i32, CliError>;

fn emit(out: &mut dyn Write, text: impl std::fmt::Display) -> Result<(), CliError> {
    writeln!(out, "{text}").map_err(CliError::io)
}

pub(super) fn dispatch(cmd: &Command, g: &GlobalConfig, out: &mut dyn Write) -> CliResult {
    match cmd {
        Command::Augment(AugmentCmd::Run(a)) => augment_run(a, g, out),
        Command::Augment(AugmentCmd::Dedup(a)) => augment_dedup(a, out),
        Command::Augment(AugmentCmd::Corpus(a)) => augment_corpus(a, g, out),
        Command::Regs(RegsCmd::Check(a)) => regs_check(a, out),
        Command::Ems(EmsCmd::Calc(a)) => ems_calc(a, out),
        Command::Ems(EmsCmd::Tension(a)) => ems_tension(a, out),
        Command::Bob(BobCmd::Simulate(a)) => bob_simulate(a, out),
        Command::Engine(EngineCmd::Run(a)) => engine_run(a, out),
        Command::Replay(a) => replay_cmd(a, out),
    }
}

fn png_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::from_io(dir, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::new(EXIT_NO_INPUT, format!("no PNG files in {}", dir.display())));
    }
    Ok(files)
}

fn load_png(path: &Path) -> Result<ImageBuffer, CliError> {
    ImageBuffer::load_png(path).map_err(|e| match e {
        crate::augment::AugmentError::Io { source, .. } => CliError::from_io(path, source),
        other => CliError::data(format!("{}: {other}", path.display())),
    })
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn augment_run(a: &AugmentRunArgs, g: &GlobalConfig, out: &mut dyn Write) -> CliResult {
    let plan = AugmentPlan {
        fisheye_focal_px: a.fisheye,
        contrast: a.contrast,
        noise_sigma: a.noise,
        blur: a.blur,
        seed: g.seed,
    };
    let files = png_files(&a.input)?;
    std::fs::create_dir_all(&a.output).map_err(|e| CliError::from_io(&a.output, e))?;
    for (i, path) in files.iter().enumerate() {
        let img = load_png(path)?;
        let aug = plan.apply(&img, i as u64).map_err(CliError::data)?;
        let dest = a.output.join(file_name(path));
        aug.save_png(&dest).map_err(CliError::io)?;
    }
    emit(out, format_args!("augmented {} images into {}", files.len(), a.output.display()))?;
    Ok(0)
}

#[derive(Serialize)]
struct Manifest {
    total: usize,
    kept: Vec<String>,
    dropped: Vec<Dropped>,
    reduction: f64,
    config: DedupConfig,
}

#[derive(Serialize)]
struct Dropped {
    file: String,
    duplicate_of: String,
    ssim: f64,
    patch_distance: f64,
}

fn augment_dedup(a: &DedupArgs, out: &mut dyn Write) -> CliResult {
    let cfg = DedupConfig {
        patch_size: a.patch,
        ssd_threshold: a.ssd_thresh,
        ssim_threshold: a.ssim_thresh,
        ..DedupConfig::default()
    };
    cfg.validate().map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;
    let files = png_files(&a.input)?;
    let images = files.iter().map(|p| load_png(p)).collect::<Result<Vec<_>, _>>()?;
    let report = dedup_report(&images, &cfg).map_err(CliError::data)?;
    let mut manifest = Manifest {
        total: files.len(),
        kept: Vec::new(),
        dropped: Vec::new(),
        reduction: 0.0,
        config: cfg,
    };
    for d in &report {
        let name = file_name(&files[d.index]);
        match (d.kept, d.nearest) {
            (true, _) => manifest.kept.push(name),
            (false, Some(s)) => manifest.dropped.push(Dropped {
                file: name,
                duplicate_of: file_name(&files[s.kept_index]),
                ssim: s.ssim,
                patch_distance: s.patch_distance,
            }),
            (false, None) => unreachable!("a dropped image always names its match"),
        }
    }
    manifest.reduction = manifest.dropped.len() as f64 / manifest.total as f64;
    if let Some(path) = &a.manifest {
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        std::fs::write(path, json + "\n").map_err(|e| CliError::from_io(path, e))?;
    }
    emit(
        out,
        format_args!(
            "kept {} of {} ({:.1}% reduction)",
            manifest.kept.len(),
            manifest.total,
            100.0 * manifest.reduction
        ),
    )?;
    Ok(0)
}

fn augment_corpus(a: &CorpusArgs, g: &GlobalConfig, out: &mut dyn Write) -> CliResult {
    if a.uniques == 0 || a.variants == 0 || a.size < 8 {
        return Err(CliError::new(EXIT_USAGE, "need uniques >= 1, variants >= 1 and size >= 8"));
    }
    let spec = CorpusSpec {
        uniques: a.uniques,
        variants: a.variants,
        size: a.size,
        seed: g.seed,
    };
    std::fs::create_dir_all(&a.output).map_err(|e| CliError::from_io(&a.output, e))?;
    let corpus = synthetic_corpus(&spec);
    for (i, img) in corpus.iter().enumerate() {
        let name = format!("scene{:03}_v{}.png", i / a.variants, i % a.variants);
        img.save_png(&a.output.join(name)).map_err(CliError::io)?;
    }
    emit(out, format_args!("wrote {} images to {}", corpus.len(), a.output.display()))?;
    Ok(0)
}

fn load_regs(path: &Path) -> Result<RegulationSet, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::from_io(path, e))?;
    parse_regulations(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn regs_check(a: &RegsCheckArgs, out: &mut dyn Write) -> CliResult {
    let regs = load_regs(&a.file)?;
    let verdict = evaluate(
        &CatchContext {
            species: a.species.clone(),
            length_cm: a.length_cm,
            date: a.date,
            bag_count_today: a.bag,
        },
        &regs,
    );
    emit(out, &verdict)?;
    Ok(match verdict.decision {
        Decision::KeepAllowed => 0,
        Decision::MustRelease => 1,
        Decision::NoRule => 2,
    })
}

fn ems_calc(a: &EmsCalcArgs, out: &mut dyn Write) -> CliResult {
    let v = required_voltage(a.current, a.resistance).map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;
    emit(out, format_args!("{v} V"))?;
    Ok(0)
}

fn ems_tension(a: &EmsTensionArgs, out: &mut dyn Write) -> CliResult {
    let cal = match &a.cal {
        Some(path) => {
            if !path.exists() {
                return Err(CliError::new(EXIT_NO_INPUT, format!("{}: not found", path.display())));
            }
            TensionCalibration::load(path).map_err(CliError::data)?
        }
        None => TensionCalibration::default(),
    };
    let t = holding_tension(a.current, a.mass_g, &cal).map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;
    emit(out, format_args!("{t} N"))?;
    Ok(0)
}

fn resolve(addr: &str) -> Result<SocketAddr, CliError> {
    addr.to_socket_addrs()
        .map_err(|e| CliError::new(EXIT_USAGE, format!("{addr}: {e}")))?
        .next()
        .ok_or_else(|| CliError::new(EXIT_USAGE, format!("{addr}: no address")))
}

fn bob_simulate(a: &SimulateArgs, out: &mut dyn Write) -> CliResult {
    let config = SimulatorConfig {
        fps: a.fps,
        clock: match a.clock {
            ClockArg::Virtual => ClockMode::Virtual,
            ClockArg::Real => ClockMode::Real,
        },
        ..SimulatorConfig::default()
    };
    config.validate().map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;
    if !(a.capacity_mah > 0.0) {
        return Err(CliError::new(EXIT_USAGE, "--capacity-mah must be > 0"));
    }
    let battery = BatteryModel::default().with_capacity(a.capacity_mah);
    let source: Box<dyn FrameSource> = match &a.frames {
        Some(dir) => {
            if !dir.is_dir() {
                return Err(CliError::new(EXIT_NO_INPUT, format!("{}: not a directory", dir.display())));
            }
            Box::new(DirectorySource::open(dir).map_err(CliError::data)?)
        }
        None => Box::new(SceneScript::fish_pass(&a.species)),
    };
    let until = a.duration_s.map(|s| (s * NS_PER_SEC as f64).round() as u64);
    let addr = resolve(&a.listen)?;
    let report = serve_once(addr, &config, battery, source, until).map_err(CliError::io)?;
    if let Some(path) = &a.trace {
        std::fs::write(path, report.trace.to_jsonl()).map_err(|e| CliError::from_io(path, e))?;
    }
    emit(
        out,
        format_args!(
            "sent {} frames, consumed {:.3} mAh, stopped: {:?}",
            report.frames_sent,
            report.battery.consumed_mah(),
            report.stop
        ),
    )?;
    Ok(0)
}

fn engine_run(a: &EngineRunArgs, out: &mut dyn Write) -> CliResult {
    let regs = load_regs(&a.regs)?;
    let detector: Box<dyn Detector + Send> = match a.detector.split_once(':') {
        None if a.detector == "blob" => Box::new(BlobDetector::new(&a.species)),
        Some(("sidecar", file)) => {
            let path = Path::new(file);
            if !path.exists() {
                return Err(CliError::new(EXIT_NO_INPUT, format!("{file}: not found")));
            }
            Box::new(SidecarDetector::load(path).map_err(CliError::data)?)
        }
        _ => return Err(CliError::new(EXIT_USAGE, format!("unknown detector {:?}", a.detector))),
    };
    if !(a.depth > 0.0) {
        return Err(CliError::new(EXIT_USAGE, "--depth must be > 0"));
    }
    let camera = CameraIntrinsics::pinhole(a.focal_px, 0.0, 0.0).map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;
    let core = EngineCore::new(
        CoreConfig {
            session: SessionConfig {
                auto_release: a.auto_release == OnOff::On,
                ..SessionConfig::default()
            },
            regs,
            camera,
            lure_current_a: a.lure_current,
            electrical: ElectricalParams::default(),
            forward_frames: a.ui_listen.is_some(),
        },
        detector,
        UniformDepth(a.depth),
    );
    let opts = EngineOptions {
        bob: resolve(&a.bob)?,
        log_path: a.log.clone(),
        ui_listen: a.ui_listen.as_deref().map(resolve).transpose()?,
        trace_path: a.trace.clone(),
        connect_timeout: Duration::from_secs(10),
    };
    let running = spawn_engine(core, opts).map_err(CliError::io)?;
    if let Some(addr) = running.ui_addr() {
        emit(out, format_args!("ui bridge listening on ws://{addr}"))?;
    }
    let summary = running.wait().map_err(CliError::io)?;
    emit(
        out,
        format_args!("session over: {} frames, {} log records", summary.frames, summary.records.len()),
    )?;
    Ok(0)
}

fn replay_cmd(a: &ReplayArgs, out: &mut dyn Write) -> CliResult {
    let text = std::fs::read_to_string(&a.trace).map_err(|e| CliError::from_io(&a.trace, e))?;
    let events = parse_trace(&text).map_err(|e| CliError::data(format!("{}: {e}", a.trace.display())))?;
    let cfg = SessionConfig {
        auto_release: a.auto_release == OnOff::On,
        ..SessionConfig::default()
    };
    let log = replay(&events, &cfg).log_text();
    match &a.out {
        Some(path) => std::fs::write(path, &log).map_err(|e| CliError::from_io(path, e))?,
        None => out.write_all(log.as_bytes()).map_err(CliError::io)?,
    }
    if let Some(golden) = &a.expect {
        let want = std::fs::read_to_string(golden).map_err(|e| CliError::from_io(golden, e))?;
        if want != log {
            eprintln!("replayed log differs from {}", golden.display());
            return Ok(1);
        }
    }
    Ok(0)
}
