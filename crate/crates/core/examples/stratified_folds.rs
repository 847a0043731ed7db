//! Five stratified folds over the 37-class reference histogram, and the
//! quarter-size subsample.

use patchvote::dataset::{class_histogram, reference_manifest, stratified_kfold, subsample_fraction};

fn main() -> patchvote::Result<()> {
    let m = reference_manifest();
    let folds = stratified_kfold(&m, 5, 0)?;
    let counts = folds.class_fold_counts(&m.class_indices(), m.num_classes());
    let sub = class_histogram(&subsample_fraction(&m, 0.25, 0)?);
    println!("{:<34} {:>5} {:>18} {:>6}", "class", "n", "per fold", "25%");
    for (c, label) in m.labels().iter().enumerate() {
        let n: usize = counts[c].iter().sum();
        println!("{label:<34} {n:>5} {:>18} {:>6}", format!("{:?}", counts[c]), sub.count(label));
    }
    let sizes: Vec<usize> = (0..5).map(|f| folds.test_indices(f).len()).collect();
    println!("fold sizes {sizes:?}, subsample total {}", sub.total());
    Ok(())
}
