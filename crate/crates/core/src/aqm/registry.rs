use super::{
    AqmError, Codel, CodelParams, Gsp, GspConfig, Pie, PieParams, QueueDiscipline, TailDrop,
    ThresholdSpec, DEFAULT_ALPHA, DEFAULT_MAX_TIME_PER_TAU, DEFAULT_PRESET_INTERVAL,
    DEFAULT_TAU_PER_PRESET,
};

/// Parameters every factory may draw from. Schemes ignore what they do not
/// use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AqmParams {
    pub buffer_limit: u64,
    pub threshold: Option<ThresholdSpec>,
    pub preset_interval: f64,
    pub tau: f64,
    pub alpha: f64,
    pub max_time: f64,
    pub codel: CodelParams,
    pub pie: PieParams,
    /// Seed for schemes with randomized decisions.
    pub seed: u64,
}

impl AqmParams {
    pub fn new(buffer_limit: u64) -> Self {
        let tau = DEFAULT_TAU_PER_PRESET * DEFAULT_PRESET_INTERVAL;
        AqmParams {
            buffer_limit,
            threshold: None,
            preset_interval: DEFAULT_PRESET_INTERVAL,
            tau,
            alpha: DEFAULT_ALPHA,
            max_time: DEFAULT_MAX_TIME_PER_TAU * tau,
            codel: CodelParams::default(),
            pie: PieParams::default(),
            seed: 0,
        }
    }

    pub fn gsp_config(&self, adaptive: bool, scheme: &'static str) -> Result<GspConfig, AqmError> {
        let threshold = self.threshold.ok_or(AqmError::MissingThreshold(scheme))?;
        Ok(GspConfig {
            threshold,
            preset_interval: self.preset_interval,
            tau: self.tau,
            alpha: self.alpha,
            max_time: self.max_time,
            buffer_limit: self.buffer_limit,
            adaptive,
        })
    }
}

pub type AqmFactory = fn(&AqmParams) -> Result<Box<dyn QueueDiscipline>, AqmError>;

struct Entry {
    name: &'static str,
    summary: &'static str,
    needs_threshold: bool,
    factory: AqmFactory,
}

/// Name-indexed set of queue disciplines.
pub struct AqmRegistry {
    entries: Vec<Entry>,
}

impl AqmRegistry {
    pub fn empty() -> Self {
        AqmRegistry { entries: Vec::new() }
    }

    /// Registry holding tail-drop, both GSP variants, CoDel and PIE.
    pub fn with_builtins() -> Self {
        let mut r = AqmRegistry::empty();
        r.register("taildrop", "drop only on buffer overflow", false, |_| {
            Ok(Box::new(TailDrop))
        });
        r.register("gsp_basic", "GSP with a fixed no-drop interval", true, |p| {
            Ok(Box::new(Gsp::new(p.gsp_config(false, "gsp_basic")?)?))
        });
        r.register("gsp_adaptive", "GSP with interval adaptation and overflow hysteresis", true, |p| {
            Ok(Box::new(Gsp::new(p.gsp_config(true, "gsp_adaptive")?)?))
        });
        r.register("codel", "CoDel sojourn-time control on dequeue", false, |p| {
            Ok(Box::new(Codel::new(p.codel, p.buffer_limit)?))
        });
        r.register("pie", "PIE probabilistic early drop", false, |p| {
            Ok(Box::new(Pie::new(p.pie, p.seed)?))
        });
        r
    }

    /// Adds a scheme, replacing any previous one with the same name.
    pub fn register(&mut self, name: &'static str, summary: &'static str, needs_threshold: bool, factory: AqmFactory) {
        let entry = Entry {
            name,
            summary,
            needs_threshold,
            factory,
        };
        match self.entries.iter_mut().find(|e| e.name == name) {
            Some(slot) => *slot = entry,
            None => self.entries.push(entry),
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.iter().any(|e| e.name == name)
    }

    pub fn needs_threshold(&self, name: &str) -> Option<bool> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.needs_threshold)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.iter().map(|e| e.name)
    }

    pub fn describe(&self) -> impl Iterator<Item = (&'static str, &'static str)> + '_ {
        self.entries.iter().map(|e| (e.name, e.summary))
    }

    pub fn build(&self, name: &str, params: &AqmParams) -> Result<Box<dyn QueueDiscipline>, AqmError> {
        let entry = self
            .entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| AqmError::UnknownDiscipline(name.to_string()))?;
        (entry.factory)(params)
    }
}

impl Default for AqmRegistry {
    fn default() -> Self {
        AqmRegistry::with_builtins()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aqm::{DropReason, QueueSnapshot, Verdict};

    #[test]
    fn builtins_build_by_name() {
        let reg = AqmRegistry::with_builtins();
        let mut params = AqmParams::new(100_000);
        params.threshold = Some(ThresholdSpec::Delay(0.01));
        for name in ["taildrop", "gsp_basic", "gsp_adaptive", "codel", "pie"] {
            let aqm = reg.build(name, &params).unwrap();
            assert_eq!(aqm.name(), name);
        }
        assert_eq!(reg.names().count(), 5);
    }

    #[test]
    fn unknown_name_is_an_error() {
        let reg = AqmRegistry::with_builtins();
        let err = reg.build("red", &AqmParams::new(1000)).err().unwrap();
        assert_eq!(err, AqmError::UnknownDiscipline("red".into()));
    }

    #[test]
    fn gsp_without_threshold_is_rejected() {
        let reg = AqmRegistry::with_builtins();
        let err = reg.build("gsp_basic", &AqmParams::new(1000)).err().unwrap();
        assert_eq!(err, AqmError::MissingThreshold("gsp_basic"));
        assert_eq!(reg.needs_threshold("gsp_adaptive"), Some(true));
        assert_eq!(reg.needs_threshold("pie"), Some(false));
    }

    #[test]
    fn custom_schemes_can_be_registered() {
        struct DropAll;
        impl QueueDiscipline for DropAll {
            fn name(&self) -> &'static str {
                "drop_all"
            }
            fn on_enqueue(&mut self, _: &QueueSnapshot, _: u64, _: f64) -> Verdict {
                Verdict::DropThreshold
            }
            fn early_drop_reason(&self) -> DropReason {
                DropReason::Threshold
            }
        }
        let mut reg = AqmRegistry::with_builtins();
        reg.register("drop_all", "drops everything", false, |_| Ok(Box::new(DropAll)));
        let mut aqm = reg.build("drop_all", &AqmParams::new(10)).unwrap();
        assert_eq!(
            aqm.on_enqueue(&QueueSnapshot::empty(10), 1, 0.0),
            Verdict::DropThreshold
        );
    }
}
