use rand::seq::SliceRandom;

use super::manifest::{DatasetManifest, SampleRecord};
use crate::error::{Error, Result};
use crate::rng::Streams;

/// Image counts per species of the 37-class macroscopic wood image collection.
pub const REFERENCE_CLASS_COUNTS: [(&str, usize); 37] = [
    ("Abies guatemalensis", 56),
    ("Aniba rosodora", 43),
    ("Aniba canelilla", 51),
    ("Aquilaria malaccensis", 36),
    ("Araucaria araucana", 22),
    ("Bulnesia sarmientoi", 125),
    ("Paubrasilia echinata 2", 59),
    ("Paubrasilia echinata 1", 50),
    ("Caryocar costaricense", 98),
    ("Cedrela odorata", 68),
    ("Dalbergia latifolia", 32),
    ("Dalbergia nigra", 28),
    ("Dalbergia retusa", 61),
    ("Dalbergia sissoo", 106),
    ("Dalbergia stevensonii", 65),
    ("Diospyros spp. 3", 27),
    ("Diospyros spp. 1", 35),
    ("Diospyros spp. 2", 55),
    ("Fitzroya cupressoides", 52),
    ("Gonystylus bancanus", 34),
    ("Gonystylus spp", 22),
    ("Guaiacum officinale", 31),
    ("Magnolia liliifera var. Obovata", 67),
    ("Pericopsis elata", 98),
    ("Pilgerodendron uviferum", 68),
    ("Platymiscium parviflorum", 48),
    ("Podocarpus neriifolius", 44),
    ("Prunus africana", 61),
    ("Quercus mongolica", 10),
    ("Swietenia humilis", 113),
    ("Swietenia macrophylla", 98),
    ("Swietenia mahagoni", 103),
    ("Handroanthus chrysanthus", 56),
    ("Handroanthus heptaphyllus", 65),
    ("Tabebuia rosea", 26),
    ("Handroanthus serratifolius", 24),
    ("Taxus cuspidata", 83),
];

/// Image-less manifest with [`REFERENCE_CLASS_COUNTS`] records per class.
pub fn reference_manifest() -> DatasetManifest {
    let mut recs = Vec::new();
    for (c, (label, n)) in REFERENCE_CLASS_COUNTS.iter().enumerate() {
        for i in 0..*n {
            recs.push(SampleRecord::new(format!("c{c:02}/{i:03}.jpg"), *label, format!("c{c:02}-{i:03}")));
        }
    }
    DatasetManifest::new("", recs).expect("reference paths are unique")
}

/// Per-class sample sizes for keeping `fraction` of a dataset with the given
/// class sizes.
///
/// The overall total is `fraction * N` rounded half up. Every class gets
/// `floor(fraction * n)` (at least one), and the shortfall is handed out one
/// record at a time by largest fractional remainder; equal remainders favour
/// the smaller class, then the earlier one.
pub fn subsample_counts(class_sizes: &[usize], fraction: f64) -> Vec<usize> {
    let n_total: usize = class_sizes.iter().sum();
    let target = (fraction * n_total as f64 + 0.5).floor() as usize;
    let exact: Vec<f64> = class_sizes.iter().map(|&n| fraction * n as f64).collect();
    let mut counts: Vec<usize> = class_sizes
        .iter()
        .zip(&exact)
        .map(|(&n, &e)| (e.floor() as usize).clamp(1.min(n), n))
        .collect();
    let mut order: Vec<usize> = (0..class_sizes.len())
        .filter(|&c| (counts[c] as f64) < exact[c])
        .collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - counts[a] as f64, exact[b] - counts[b] as f64);
        rb.total_cmp(&ra).then(class_sizes[a].cmp(&class_sizes[b])).then(a.cmp(&b))
    });
    let given: usize = counts.iter().sum();
    for &c in order.iter().take(target.saturating_sub(given)) {
        counts[c] += 1;
    }
    counts
}

/// Keeps [`subsample_counts`] records of every class, drawn without
/// replacement, in their original order. Label order is preserved.
pub fn subsample_fraction(m: &DatasetManifest, fraction: f64, seed: u64) -> Result<DatasetManifest> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("fraction {fraction} outside (0, 1]")));
    }
    let streams = Streams::new(seed, "subsample");
    let classes = m.class_indices();
    let sizes = class_histogram(m).counts;
    let targets = subsample_counts(&sizes, fraction);
    let mut keep = Vec::new();
    for c in 0..m.num_classes() {
        let mut members: Vec<usize> = (0..m.len()).filter(|&i| classes[i] == c).collect();
        members.shuffle(&mut streams.stream(c as u64));
        keep.extend_from_slice(&members[..targets[c]]);
    }
    keep.sort_unstable();
    Ok(m.select(&keep))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassHistogram {
    pub labels: Vec<String>,
    pub counts: Vec<usize>,
}

impl ClassHistogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn min(&self) -> Option<usize> {
        self.counts.iter().copied().min()
    }

    pub fn max(&self) -> Option<usize> {
        self.counts.iter().copied().max()
    }

    pub fn mean(&self) -> Option<f64> {
        (!self.counts.is_empty()).then(|| self.total() as f64 / self.counts.len() as f64)
    }

    pub fn count(&self, label: &str) -> usize {
        self.labels.iter().position(|l| l == label).map_or(0, |i| self.counts[i])
    }
}

/// Records per class in canonical label order.
pub fn class_histogram(m: &DatasetManifest) -> ClassHistogram {
    let mut counts = vec![0; m.num_classes()];
    for c in m.class_indices() {
        counts[c] += 1;
    }
    ClassHistogram {
        labels: m.labels().to_vec(),
        counts,
    }
}
