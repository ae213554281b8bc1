//! JSON descriptors for presentations.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ce::{CeSet, CeSpec};
use super::{Adversarial, Finite, Opaque, Rotated, SharedPresentation, Standard};
use crate::error::{Error, Result};
use crate::scalar::{GaussianRational, PExponent};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PresentationDescriptor {
    Standard {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<String>,
    },
    Rotated {
        zeta: GaussianRational,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<String>,
    },
    Finite {
        dim: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<String>,
    },
    Adversarial {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<String>,
        ce: CeSpec,
    },
    Opaque { inner: Box<PresentationDescriptor> },
}

fn exponent(p: &Option<String>, fallback: Option<&PExponent>) -> Result<PExponent> {
    match (p, fallback) {
        (Some(s), _) => PExponent::parse(s),
        (None, Some(p)) => Ok(p.clone()),
        (None, None) => Err(Error::InvalidInput("presentation needs an exponent p".into())),
    }
}

/// Instantiate a descriptor; `fallback_p` is used when the descriptor omits `p`.
pub fn build(desc: &PresentationDescriptor, fallback_p: Option<&PExponent>) -> Result<SharedPresentation> {
    Ok(match desc {
        PresentationDescriptor::Standard { p } => Arc::new(Standard::new(exponent(p, fallback_p)?)),
        PresentationDescriptor::Rotated { zeta, p } => Arc::new(Rotated::new(exponent(p, fallback_p)?, zeta.clone())?),
        PresentationDescriptor::Finite { dim, p } => Arc::new(Finite::new(exponent(p, fallback_p)?, *dim)),
        PresentationDescriptor::Adversarial { p, ce } => {
            Arc::new(Adversarial::new(CeSet::new(ce.clone())?, exponent(p, fallback_p)?))
        }
        PresentationDescriptor::Opaque { inner } => Arc::new(Opaque(build(inner, fallback_p)?)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_descriptors() {
        let d: PresentationDescriptor = serde_json::from_str(
            r#"{"type":"adversarial","p":"3/2","ce":{"kind":"explicit","elements":[1,3],"stages":[[1],[1,3]]}}"#,
        )
        .unwrap();
        let pres = build(&d, None).unwrap();
        assert_eq!(pres.exponent().to_string(), "3/2");
        let d: PresentationDescriptor = serde_json::from_str(r#"{"type":"rotated","zeta":"i"}"#).unwrap();
        assert!(build(&d, None).is_err());
        assert!(build(&d, Some(&PExponent::int(1))).is_ok());
        let d: PresentationDescriptor =
            serde_json::from_str(r#"{"type":"adversarial","p":"1","ce":{"kind":"explicit","elements":[0]}}"#).unwrap();
        assert_eq!(build(&d, None).err(), Some(Error::ZeroInC));
        let d: PresentationDescriptor = serde_json::from_str(r#"{"type":"standard","p":"1"}"#).unwrap();
        assert_eq!(build(&d, None).unwrap().descriptor(), d);
    }
}
