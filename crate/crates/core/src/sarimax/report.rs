//! Key-value fit report used for persistence.

use super::{SarimaxCoefficients, SarimaxFit, SarimaxSpec};
use crate::error::{ForecastError, Result};
use crate::persist::KvDoc;
use crate::series::DailySeries;

impl SarimaxFit {
    pub fn to_kv(&self) -> KvDoc {
        let s = &self.spec;
        let c = &self.coefficients;
        let mut doc = KvDoc::new();
        doc.push("model", "sarimax");
        doc.push("label", s.to_string());
        doc.push_usizes("order", &[s.p, s.d, s.q]);
        doc.push_usizes("seasonal_order", &[s.seasonal_p, s.seasonal_d, s.seasonal_q, s.period]);
        doc.push("exog", s.exog.join(","));
        doc.push_f64s("phi", &c.phi);
        doc.push_f64s("theta", &c.theta);
        doc.push_f64s("seasonal_phi", &c.seasonal_phi);
        doc.push_f64s("seasonal_theta", &c.seasonal_theta);
        doc.push_f64("intercept", c.intercept);
        doc.push_f64s("beta", &c.beta);
        doc.push_f64("sigma2", self.sigma2);
        doc.push_f64("loglik", self.loglik);
        doc.push_usizes("n_effective", &[self.residuals.len()]);
        doc.push_usizes("iterations", &[self.iterations]);
        doc
    }

    /// Text report: spec, coefficients, variance and log-likelihood.
    pub fn to_report(&self) -> String {
        self.to_kv().render()
    }

    pub fn spec_from_kv(doc: &KvDoc) -> Result<SarimaxSpec> {
        let order = doc.usizes("order")?;
        let seasonal = doc.usizes("seasonal_order")?;
        if order.len() != 3 || seasonal.len() != 4 {
            return Err(ForecastError::Persist("order needs 3 and seasonal_order 4 integers".into()));
        }
        Ok(SarimaxSpec::new(order[0], order[1], order[2])
            .seasonal(seasonal[0], seasonal[1], seasonal[2], seasonal[3])
            .with_exog(doc.names("exog")?))
    }

    /// Rebuild a fit from a report, conditioned on `history`.
    pub fn from_kv(doc: &KvDoc, history: &DailySeries) -> Result<Self> {
        if doc.get("model") != Some("sarimax") {
            return Err(ForecastError::Persist("not a sarimax report".into()));
        }
        let spec = Self::spec_from_kv(doc)?;
        let coefficients = SarimaxCoefficients {
            phi: doc.f64s("phi")?,
            theta: doc.f64s("theta")?,
            seasonal_phi: doc.f64s("seasonal_phi")?,
            seasonal_theta: doc.f64s("seasonal_theta")?,
            intercept: doc.f64("intercept")?,
            beta: doc.f64s("beta")?,
        };
        let mut fit = Self::from_coefficients(history, &spec, coefficients)?;
        fit.sigma2 = doc.f64("sigma2")?;
        fit.loglik = doc.f64("loglik")?;
        fit.iterations = doc.usize("iterations")?;
        Ok(fit)
    }

    pub fn from_report(text: &str, history: &DailySeries) -> Result<Self> {
        Self::from_kv(&KvDoc::parse(text)?, history)
    }
}
