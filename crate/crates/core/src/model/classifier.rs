use std::fmt;
use std::path::Path;

use super::checkpoint::{Checkpoint, Layer};
use super::cnn::{Architecture, SmallCnn};
use crate::augment::AugmentProtocol;
use crate::error::{Error, Result};
use crate::imagery::{GridSpec, Raster};

/// Largest tolerated deviation of a probability vector's sum from one.
pub const SUM_TOLERANCE: f64 = 1e-6;

/// A validated categorical distribution: finite, non-negative, summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::ContractViolation("empty probability vector".into()));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::ContractViolation(format!("probability {i} is {v}")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::ContractViolation(format!("probabilities sum to {sum}")));
        }
        Ok(ProbabilityVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Most probable class; the lowest index wins ties.
    pub fn argmax(&self) -> usize {
        super::argmax(&self.0)
    }
}

/// Anything that maps a square raster of side [`Classifier::input_size`] to a
/// distribution over [`Classifier::labels`].
pub trait Classifier: Sync {
    fn labels(&self) -> &[String];

    fn input_size(&self) -> usize;

    fn num_classes(&self) -> usize {
        self.labels().len()
    }

    fn predict_proba(&self, image: &Raster) -> Result<ProbabilityVector>;
}

/// Fails with a configuration error unless `classifier` was built for exactly `labels`.
pub fn ensure_labels(classifier: &dyn Classifier, labels: &[String]) -> Result<()> {
    if classifier.labels() != labels {
        return Err(Error::Config(format!(
            "classifier has {} classes {:?}, dataset has {} classes {:?}",
            classifier.num_classes(),
            classifier.labels(),
            labels.len(),
            labels
        )));
    }
    Ok(())
}

fn check_input(image: &Raster, size: usize) -> Result<()> {
    if image.dimensions() != (size, size) {
        return Err(Error::ShapeMismatch(format!(
            "classifier expects {size}x{size}, got {}x{}",
            image.width(),
            image.height()
        )));
    }
    Ok(())
}

/// A trained network together with the labels and grid it was trained for.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub labels: Vec<String>,
    pub grid: GridSpec,
    pub augment: AugmentProtocol,
    pub cnn: SmallCnn<f32>,
}

impl TrainedModel {
    pub fn new(labels: Vec<String>, grid: GridSpec, augment: AugmentProtocol, cnn: SmallCnn<f32>) -> Result<Self> {
        if labels.len() != cnn.architecture().num_classes {
            return Err(Error::Config(format!(
                "{} labels for a {}-class network",
                labels.len(),
                cnn.architecture().num_classes
            )));
        }
        Ok(TrainedModel {
            labels,
            grid,
            augment,
            cnn,
        })
    }

    pub fn to_checkpoint(&self) -> Result<Checkpoint> {
        let mut layers = network_layers(&self.cnn)?;
        layers.push(Layer::new(
            "meta.grid",
            vec![2],
            vec![self.grid.rows() as f32, self.grid.cols() as f32],
        )?);
        layers.push(Layer::new("meta.augment", vec![1], vec![augment_code(&self.augment)])?);
        Ok(Checkpoint {
            labels: self.labels.clone(),
            input_size: self.cnn.architecture().input_size,
            layers,
        })
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let cnn = network_from_checkpoint(ck)?;
        let grid = match ck.layer("meta.grid") {
            Some(l) if l.data.len() == 2 => {
                let dims = [l.data[0], l.data[1]].map(meta_int);
                match dims {
                    [Some(r), Some(c)] => GridSpec::new(r, c).map_err(|e| Error::CorruptCheckpoint(e.to_string()))?,
                    _ => return Err(Error::CorruptCheckpoint(format!("bad grid {:?}", l.data))),
                }
            }
            Some(_) => return Err(Error::CorruptCheckpoint("bad meta.grid shape".into())),
            None => GridSpec::single(),
        };
        let augment = match ck.layer("meta.augment") {
            Some(l) if l.data.len() == 1 => augment_from_code(l.data[0])?,
            Some(_) => return Err(Error::CorruptCheckpoint("bad meta.augment shape".into())),
            None => AugmentProtocol::None,
        };
        TrainedModel::new(ck.labels.clone(), grid, augment, cnn)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_checkpoint()?.save(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_checkpoint(&Checkpoint::load(path)?)
    }
}

impl Classifier for TrainedModel {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn input_size(&self) -> usize {
        self.cnn.architecture().input_size
    }

    fn predict_proba(&self, image: &Raster) -> Result<ProbabilityVector> {
        ProbabilityVector::new(self.cnn.predict_raster(image)?)
    }
}

fn meta_int(v: f32) -> Option<usize> {
    (v.is_finite() && v >= 1.0 && v.fract() == 0.0 && v <= 1e6).then_some(v as usize)
}

fn augment_code(p: &AugmentProtocol) -> f32 {
    match p {
        AugmentProtocol::None => 0.0,
        AugmentProtocol::Tdli => 1.0,
        AugmentProtocol::VerlyLopes(_) => 2.0,
        AugmentProtocol::Tang(_) => 3.0,
    }
}

fn augment_from_code(code: f32) -> Result<AugmentProtocol> {
    let name = match code {
        0.0 => "none",
        1.0 => "tdli",
        2.0 => "vl",
        3.0 => "tang",
        c => return Err(Error::CorruptCheckpoint(format!("unknown augmentation code {c}"))),
    };
    name.parse()
}

fn network_layers(cnn: &SmallCnn<f32>) -> Result<Vec<Layer>> {
    cnn.layout()
        .iter()
        .map(|spec| Layer::new(spec.name.clone(), spec.shape.clone(), cnn.params()[spec.range()].to_vec()))
        .collect()
}

/// Rebuilds the network from the layer shapes, rejecting anything that does
/// not match the architecture exactly.
fn network_from_checkpoint(ck: &Checkpoint) -> Result<SmallCnn<f32>> {
    let width = |name: &str| -> Result<usize> {
        ck.layer(name)
            .and_then(|l| l.shape.first().copied())
            .ok_or_else(|| Error::CorruptCheckpoint(format!("missing layer {name}")))
    };
    let widths = [width("conv1.weight")?, width("conv2.weight")?, width("conv3.weight")?];
    let arch = Architecture::with_widths(ck.labels.len(), ck.input_size, widths)
        .map_err(|e| Error::CorruptCheckpoint(e.to_string()))?;
    let mut params = Vec::with_capacity(arch.parameter_count());
    for spec in arch.layout() {
        let layer = ck
            .layer(&spec.name)
            .ok_or_else(|| Error::CorruptCheckpoint(format!("missing layer {}", spec.name)))?;
        if layer.shape != spec.shape {
            return Err(Error::CorruptCheckpoint(format!(
                "layer {} has shape {:?}, expected {:?}",
                spec.name, layer.shape, spec.shape
            )));
        }
        params.extend_from_slice(&layer.data);
    }
    SmallCnn::from_params(arch, params)
}

type ProbaFn = dyn Fn(&Raster) -> Result<Vec<f64>> + Send + Sync;

/// Adapter that puts an arbitrary scoring function behind [`Classifier`],
/// enforcing the input shape and the output contract on every call.
pub struct ExternalClassifier {
    labels: Vec<String>,
    input_size: usize,
    score: Box<ProbaFn>,
}

impl ExternalClassifier {
    pub fn new(
        labels: Vec<String>,
        input_size: usize,
        score: impl Fn(&Raster) -> Result<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        ExternalClassifier {
            labels,
            input_size,
            score: Box::new(score),
        }
    }

    /// Wraps the network stored in a weight file, ignoring any training metadata.
    pub fn from_checkpoint(path: impl AsRef<Path>) -> Result<Self> {
        let ck = Checkpoint::load(path)?;
        let cnn = network_from_checkpoint(&ck)?;
        Ok(Self::new(ck.labels, ck.input_size, move |r| cnn.predict_raster(r)))
    }
}

impl fmt::Debug for ExternalClassifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExternalClassifier")
            .field("labels", &self.labels)
            .field("input_size", &self.input_size)
            .finish_non_exhaustive()
    }
}

impl Classifier for ExternalClassifier {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn input_size(&self) -> usize {
        self.input_size
    }

    fn predict_proba(&self, image: &Raster) -> Result<ProbabilityVector> {
        check_input(image, self.input_size)?;
        let p = (self.score)(image)?;
        if p.len() != self.labels.len() {
            return Err(Error::ContractViolation(format!(
                "{} probabilities for {} classes",
                p.len(),
                self.labels.len()
            )));
        }
        ProbabilityVector::new(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Streams;
    use rand::Rng;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("class{i}")).collect()
    }

    fn model(c: usize, s: usize, seed: u64) -> TrainedModel {
        let arch = Architecture::with_widths(c, s, [4, 6, 8]).unwrap();
        TrainedModel::new(labels(c), GridSpec::new(6, 8).unwrap(), AugmentProtocol::Tdli, SmallCnn::init(arch, seed))
            .unwrap()
    }

    #[test]
    fn probability_contract() {
        assert!(ProbabilityVector::new(vec![0.2, 0.8]).is_ok());
        assert!(ProbabilityVector::new(vec![0.5, 0.5 + 5e-7]).is_ok());
        for bad in [vec![], vec![0.5, 0.6], vec![-0.1, 1.1], vec![f64::NAN, 1.0], vec![0.3, 0.3]] {
            assert!(matches!(ProbabilityVector::new(bad), Err(Error::ContractViolation(_))));
        }
        assert_eq!(ProbabilityVector::new(vec![0.4, 0.2, 0.4]).unwrap().argmax(), 0);
    }

    #[test]
    fn checkpoint_round_trip_preserves_predictions() {
        let m = model(5, 16, 3);
        let bytes = m.to_checkpoint().unwrap().to_bytes().unwrap();
        let back = TrainedModel::from_checkpoint(&Checkpoint::from_bytes(&bytes).unwrap()).unwrap();
        assert_eq!(back, m);
        let mut rng = Streams::new(1, "inputs").stream(0);
        for _ in 0..100 {
            let r = Raster::from_fn(16, 16, |_, _| rng.gen());
            assert_eq!(
                m.predict_proba(&r).unwrap().argmax(),
                back.predict_proba(&r).unwrap().argmax()
            );
            assert_eq!(m.predict_proba(&r).unwrap(), back.predict_proba(&r).unwrap());
        }
    }

    #[test]
    fn file_round_trip_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.pvw");
        let m = model(3, 8, 1);
        m.save(&path).unwrap();
        assert_eq!(TrainedModel::load(&path).unwrap(), m);

        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(TrainedModel::load(&path), Err(Error::CorruptCheckpoint(_))));
    }

    #[test]
    fn mismatched_layer_shape_is_corrupt() {
        let mut ck = model(3, 8, 1).to_checkpoint().unwrap();
        let fc = ck.layers.iter_mut().find(|l| l.name == "fc.bias").unwrap();
        fc.shape = vec![4];
        fc.data.push(0.0);
        assert!(matches!(TrainedModel::from_checkpoint(&ck), Err(Error::CorruptCheckpoint(_))));
    }

    #[test]
    fn zero_head_with_permuted_labels_predicts_uniformly() {
        let mut m = model(4, 8, 2);
        m.cnn.zero_head();
        let mut permuted = m.clone();
        permuted.labels.reverse();
        let r = Raster::filled(8, 8, [90, 10, 200]);
        let a = m.predict_proba(&r).unwrap();
        let b = permuted.predict_proba(&r).unwrap();
        assert_eq!(a, b);
        assert!(a.as_slice().iter().all(|&p| (p - 0.25).abs() < 1e-12));
    }

    #[test]
    fn wrong_input_size_is_rejected() {
        let m = model(3, 8, 1);
        assert!(matches!(m.predict_proba(&Raster::filled(9, 8, [0; 3])), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn external_classifier_validates_outputs() {
        let ok = ExternalClassifier::new(labels(2), 4, |_| Ok(vec![0.25, 0.75]));
        assert_eq!(ok.predict_proba(&Raster::filled(4, 4, [1; 3])).unwrap().argmax(), 1);
        assert!(ok.predict_proba(&Raster::filled(5, 4, [1; 3])).is_err());

        let bad = ExternalClassifier::new(labels(2), 4, |_| Ok(vec![0.5, 0.6]));
        assert!(matches!(bad.predict_proba(&Raster::filled(4, 4, [1; 3])), Err(Error::ContractViolation(_))));
        let short = ExternalClassifier::new(labels(3), 4, |_| Ok(vec![0.5, 0.5]));
        assert!(matches!(short.predict_proba(&Raster::filled(4, 4, [1; 3])), Err(Error::ContractViolation(_))));

        assert!(matches!(ensure_labels(&ok, &labels(3)), Err(Error::Config(_))));
        assert!(ensure_labels(&ok, &labels(2)).is_ok());
    }

    #[test]
    fn external_wrapper_of_a_weight_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.pvw");
        let m = model(3, 8, 5);
        m.save(&path).unwrap();
        let ext = ExternalClassifier::from_checkpoint(&path).unwrap();
        let r = Raster::filled(8, 8, [30, 60, 90]);
        assert_eq!(ext.predict_proba(&r).unwrap(), m.predict_proba(&r).unwrap());
    }
}
