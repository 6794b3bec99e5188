//! Text checkpoint: hyperparameters, scalers, a tensor shape manifest and
//! the tensor values in round-trip float form.

use super::{LstmFit, LstmParams, LstmSpec, TrainingTrace};
use crate::error::{ForecastError, Result};
use crate::persist::KvDoc;
use crate::series::Scaler;

impl LstmFit {
    pub fn to_kv(&self) -> KvDoc {
        let s = &self.spec;
        let mut doc = KvDoc::new();
        doc.push("model", "lstm");
        doc.push_usizes("window", &[s.window]);
        doc.push_usizes("hidden_dim", &[s.hidden_dim]);
        doc.push_usizes("n_layers", &[s.n_layers]);
        doc.push_usizes("horizon", &[s.horizon]);
        doc.push("exog", s.exog.join(","));
        doc.push_f64("learning_rate", s.learning_rate);
        doc.push_usizes("patience", &[s.patience]);
        doc.push_usizes("max_epochs", &[s.max_epochs]);
        doc.push_usizes("batch_size", &[s.batch_size]);
        doc.push("seed", s.seed.to_string());
        doc.push_usizes("best_epoch", &[self.trace.best_epoch]);
        doc.push_f64s("target_scaler", &[self.target_scaler.mean, self.target_scaler.std]);
        for (name, sc) in s.exog.iter().zip(&self.exog_scalers) {
            doc.push_f64s(format!("exog_scaler.{name}"), &[sc.mean, sc.std]);
        }
        doc.push_f64s("constant_target", self.constant_target.as_slice());
        let values = self.params.values();
        for t in self.params.shape().tensors() {
            doc.push_usizes(format!("shape.{}", t.name), &[t.rows, t.cols]);
            doc.push_f64s(format!("tensor.{}", t.name), &values[t.offset..t.offset + t.len()]);
        }
        doc
    }

    pub fn to_checkpoint(&self) -> String {
        self.to_kv().render()
    }

    pub fn from_kv(doc: &KvDoc) -> Result<Self> {
        if doc.get("model") != Some("lstm") {
            return Err(ForecastError::Persist("not an LSTM checkpoint".into()));
        }
        let seed = doc
            .require("seed")?
            .parse()
            .map_err(|_| ForecastError::Persist("bad seed".into()))?;
        let spec = LstmSpec {
            window: doc.usize("window")?,
            hidden_dim: doc.usize("hidden_dim")?,
            n_layers: doc.usize("n_layers")?,
            horizon: doc.usize("horizon")?,
            exog: doc.names("exog")?,
            learning_rate: doc.f64("learning_rate")?,
            patience: doc.usize("patience")?,
            max_epochs: doc.usize("max_epochs")?,
            batch_size: doc.usize("batch_size")?,
            seed,
        };
        spec.validate().map_err(|e| ForecastError::Persist(e.to_string()))?;
        let scaler = |key: &str| -> Result<Scaler> {
            match doc.f64s(key)?.as_slice() {
                [mean, std] => Ok(Scaler { mean: *mean, std: *std }),
                _ => Err(ForecastError::Persist(format!("'{key}' needs mean and std"))),
            }
        };
        let target_scaler = scaler("target_scaler")?;
        let exog_scalers = spec
            .exog
            .iter()
            .map(|n| scaler(&format!("exog_scaler.{n}")))
            .collect::<Result<Vec<_>>>()?;
        let constant_target = doc.f64s("constant_target")?.first().copied();

        let shape = spec.shape();
        let mut values = vec![0.0; shape.n_params()];
        for t in shape.tensors() {
            let dims = doc.usizes(&format!("shape.{}", t.name))?;
            if dims != [t.rows, t.cols] {
                return Err(ForecastError::Persist(format!(
                    "tensor {} has shape {dims:?}, expected [{}, {}]",
                    t.name, t.rows, t.cols
                )));
            }
            let v = doc.f64s(&format!("tensor.{}", t.name))?;
            if v.len() != t.len() {
                return Err(ForecastError::Persist(format!(
                    "tensor {} has {} values, expected {}",
                    t.name,
                    v.len(),
                    t.len()
                )));
            }
            values[t.offset..t.offset + t.len()].copy_from_slice(&v);
        }
        let params = LstmParams::from_values(shape, values)
            .map_err(|e| ForecastError::Persist(e.to_string()))?;
        Ok(Self {
            spec,
            params,
            target_scaler,
            exog_scalers,
            constant_target,
            trace: TrainingTrace {
                best_epoch: doc.usize("best_epoch")?,
                ..TrainingTrace::default()
            },
        })
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        Self::from_kv(&KvDoc::parse(text)?)
    }
}
