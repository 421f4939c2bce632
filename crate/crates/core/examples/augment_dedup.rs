//! Builds a synthetic corpus of scenes with near-copies and removes the
//! copies with the SSIM and patch-distance scan.
//!
//! ```text
//! cargo run --example augment_dedup -- [UNIQUES] [VARIANTS]
//! ```

use std::error::Error;

use catchwise::augment::{dedup_report, synthetic_corpus, CorpusSpec, DedupConfig};

pub fn dedup_summary(uniques: usize, variants: usize) -> Result<(usize, usize), Box<dyn Error>> {
    let spec = CorpusSpec { uniques, variants, size: 64, seed: 11 };
    let corpus = synthetic_corpus(&spec);
    let report = dedup_report(&corpus, &DedupConfig::default())?;
    for d in report.iter().filter(|d| d.index % variants == 1) {
        if let Some(n) = d.nearest {
            println!(
                "image {:3} {} (vs {:3}: ssim {:.3}, patch {:.1})",
                d.index,
                if d.kept { "kept   " } else { "dropped" },
                n.kept_index,
                n.ssim,
                n.patch_distance
            );
        }
    }
    let kept = report.iter().filter(|d| d.kept).count();
    Ok((corpus.len(), kept))
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (total, kept) = dedup_summary(6, 4)?;
    println!("{total} images, {kept} kept ({:.1}% removed)", 100.0 * (total - kept) as f64 / total as f64);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>());
    match (args.next(), args.next()) {
        (Some(u), Some(v)) => {
            let (total, kept) = dedup_summary(u?, v?)?;
            println!("{total} images, {kept} kept");
            Ok(())
        }
        _ => run_example(),
    }
}
