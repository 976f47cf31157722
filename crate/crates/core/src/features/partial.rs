/// One computed feature value before matrix assembly.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureValue {
    Numeric(f64),
    /// Raw category label; integer-encoded by [`super::assemble_matrix`].
    Category(String),
    Missing,
}

impl FeatureValue {
    pub fn from_option(v: Option<f64>) -> Self {
        match v {
            Some(x) => FeatureValue::Numeric(x),
            None => FeatureValue::Missing,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            FeatureValue::Numeric(x) => Some(*x),
            _ => None,
        }
    }
}

/// Named feature values produced by one feature family for one subscriber.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartialFeatures {
    pub values: Vec<(String, FeatureValue)>,
}

impl PartialFeatures {
    pub fn push(&mut self, name: &str, v: FeatureValue) {
        self.values.push((name.to_string(), v));
    }

    pub fn num(&mut self, name: &str, v: f64) {
        self.push(name, FeatureValue::Numeric(v));
    }

    pub fn opt(&mut self, name: &str, v: Option<f64>) {
        self.push(name, FeatureValue::from_option(v));
    }

    pub fn get(&self, name: &str) -> Option<&FeatureValue> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    /// Numeric value of `name`; `None` when absent, missing or categorical.
    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(FeatureValue::as_f64)
    }

    pub fn extend(&mut self, other: PartialFeatures) {
        self.values.extend(other.values);
    }
}
