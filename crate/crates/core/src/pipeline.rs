//! End-to-end wiring: proposals, classifier training, graph construction,
//! selection and evaluation, all driven by one [`PipelineConfig`].

use std::collections::BTreeMap;

use log::info;
use serde::{Deserialize, Serialize};

use crate::classify::{
    label_mitosis_sets, label_move_edges, label_proposals, train_forest, ForestConfig, ForestModel, TrainingSet,
};
use crate::error::{Error, Result};
use crate::eval::{
    evaluate_detection, evaluate_tracking, graph_recall, EvalConfig, EvalReport, GroundTruth, TrackingResult,
};
use crate::features::{
    mitosis_features_with, move_features_with, FeatureKind, FeatureOptions, FeatureVector, Member, MITOSIS_DIM,
    PROPOSAL_DIM,
};
use crate::graph::{build_graph, candidates, proposal_feature_table, ForestScorer, GraphConfig, TrackingGraph};
use crate::par;
use crate::proposals::{conflicts, generate_sequence, Frame, LogBlobConfig, Proposal, ThresholdConfig};
use crate::sim::{corrupt, simulate, CorruptionConfig, SimConfig};
use crate::solve::{solver_for, track as solve_track, LineageForest, Solution, SolveConfig};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// Perturbed reference regions; needs ground truth with label grids.
    #[default]
    Simulated,
    Threshold,
    LogBlob,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProposalsConfig {
    pub generator: Generator,
    pub threshold: ThresholdConfig,
    pub log_blob: LogBlobConfig,
    /// Conflict when IoU exceeds `c1`...
    pub c1: f64,
    /// ...or either mask is covered by the other above `c2`.
    pub c2: f64,
}

impl Default for ProposalsConfig {
    fn default() -> Self {
        ProposalsConfig {
            generator: Generator::Simulated,
            threshold: ThresholdConfig::default(),
            log_blob: LogBlobConfig::default(),
            c1: 0.5,
            c2: 0.8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyConfig {
    pub proposal: ForestConfig,
    pub moves: ForestConfig,
    pub mitosis: ForestConfig,
    /// Simulated sequences used for training in `e2e`.
    pub training_sequences: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            proposal: ForestConfig::default(),
            moves: ForestConfig::default(),
            mitosis: ForestConfig::default(),
            training_sequences: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub sequence: SimConfig,
    /// Applied to the evaluated sequence.
    pub corruption: CorruptionConfig,
    /// Applied to the training sequences so every classifier sees negatives.
    pub training_corruption: CorruptionConfig,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            sequence: SimConfig::default(),
            corruption: CorruptionConfig::default(),
            training_corruption: CorruptionConfig {
                seed: 0,
                drop: 0.05,
                clutter: 0.3,
                merge: 0.1,
                split: 0.1,
                jitter: 1.0,
                score_noise: 0.05,
            },
        }
    }
}

/// Every tunable of a run. Seeds inside sections are ignored: each stage
/// draws its seed from `seed`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    pub proposals: ProposalsConfig,
    pub features: FeatureOptions,
    pub classify: ClassifyConfig,
    pub graph: GraphConfig,
    pub solve: SolveConfig,
    pub eval: EvalConfig,
    pub sim: SimSection,
}

impl PipelineConfig {
    /// Parses and validates a JSON config; every failure is a config error.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.proposals;
        if !(0.0..=1.0).contains(&p.c1) || !(0.0..=1.0).contains(&p.c2) {
            return Err(Error::Config("proposals.c1 and proposals.c2 must lie in [0, 1]".into()));
        }
        self.sim.sequence.validate()?;
        self.sim.corruption.validate()?;
        self.sim.training_corruption.validate()?;
        if self.classify.training_sequences == 0 {
            return Err(Error::Config("classify.training_sequences must be at least 1".into()));
        }
        Ok(())
    }

    /// Seed of a named stage, a fixed function of the global seed.
    pub fn stage_seed(&self, stage: &str) -> u64 {
        stage_seed(self.seed, stage)
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            seed: self.stage_seed("sim"),
            ..self.sim.sequence.clone()
        }
    }

    fn training_sim(&self, i: usize) -> SimConfig {
        SimConfig {
            seed: self.stage_seed(&format!("train-sim/{i}")),
            ..self.sim.sequence.clone()
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes the stage name (FNV-1a) into the seed.
pub fn stage_seed(seed: u64, stage: &str) -> u64 {
    let h = stage.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    });
    splitmix64(seed ^ splitmix64(h))
}

/// Proposals for a sequence. The simulated generator perturbs the reference
/// regions with `corruption` (seeded from `stage`); the others read pixels.
pub fn propose(
    cfg: &PipelineConfig,
    frames: &[Frame],
    gt: Option<&GroundTruth>,
    corruption: &CorruptionConfig,
    stage: &str,
) -> Result<Vec<Proposal>> {
    let props = match cfg.proposals.generator {
        Generator::Simulated => {
            let gt = gt.ok_or_else(|| {
                Error::MissingGroundTruth("the simulated generator perturbs reference label grids".into())
            })?;
            let ccfg = CorruptionConfig {
                seed: cfg.stage_seed(stage),
                ..corruption.clone()
            };
            corrupt(gt, frames, &ccfg)?
        }
        Generator::Threshold => generate_sequence(&cfg.proposals.threshold, frames),
        Generator::LogBlob => generate_sequence(&cfg.proposals.log_blob, frames),
    };
    info!("{} proposals over {} frames", props.len(), frames.len());
    Ok(props)
}

/// The three classifiers and the gating radius learned from annotated data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Models {
    pub gating_radius: f64,
    pub features: FeatureOptions,
    pub proposal: ForestModel,
    pub moves: ForestModel,
    pub mitosis: ForestModel,
}

/// An annotated sequence with its proposals.
pub struct Annotated<'a> {
    pub frames: &'a [Frame],
    pub gt: &'a GroundTruth,
    pub props: &'a [Proposal],
}

struct Prepared {
    feats: Vec<Vec<f64>>,
    moves: Vec<(u64, u64)>,
    sets: Vec<(u64, u64, u64)>,
}

/// Labels every proposal, gated move pair and mitosis triple with the marker
/// rules and fits one forest per kind. Edge vectors carry the proposal
/// classifier's own probabilities, as they will at tracking time.
pub fn train(cfg: &PipelineConfig, data: &[Annotated]) -> Result<Models> {
    if data.is_empty() {
        return Err(Error::MissingGroundTruth("no annotated sequences to train on".into()));
    }
    let gating = match cfg.graph.gating_radius {
        Some(r) => r,
        None => data.iter().try_fold(0.0f64, |acc, d| {
            let r = cfg.graph.resolved(Some(d.gt))?.gating_radius.unwrap_or(0.0);
            Ok::<_, Error>(acc.max(r))
        })?,
    };
    let mitosis_dist = cfg.graph.mitosis_dist.unwrap_or(gating);

    let mut node_set = TrainingSet::new(FeatureKind::Proposal, PROPOSAL_DIM);
    let mut prepared = Vec::with_capacity(data.len());
    for d in data {
        let feats = proposal_feature_table(d.props, d.frames)?;
        for (f, label) in feats.iter().zip(label_proposals(d.props, d.gt)?) {
            node_set.push(vector(FeatureKind::Proposal, f), label)?;
        }
        let conf = conflicts(d.props, cfg.proposals.c1, cfg.proposals.c2);
        let (moves, sets) = candidates(d.props, &conf, gating, mitosis_dist, cfg.graph.mitosis_n);
        prepared.push(Prepared { feats, moves, sets });
    }
    let proposal = fit(&node_set, &cfg.classify.proposal, cfg.stage_seed("forest/proposal"))?;

    let mut move_set = TrainingSet::new(FeatureKind::Move, cfg.features.move_dim());
    let mut mitosis_set = TrainingSet::new(FeatureKind::Mitosis, MITOSIS_DIM);
    for (d, prep) in data.iter().zip(&prepared) {
        let probs = par::try_map(&prep.feats, |f| proposal.predict(f))?;
        let index: BTreeMap<u64, usize> = d.props.iter().enumerate().map(|(i, p)| (p.id, i)).collect();
        let rows = par::try_map(&prep.moves, |&(a, b)| {
            let (i, j) = (index[&a], index[&b]);
            move_features_with(
                &d.props[i],
                &d.props[j],
                &prep.feats[i],
                &prep.feats[j],
                probs[i],
                probs[j],
                &cfg.features,
            )
        })?;
        for (row, label) in rows.into_iter().zip(label_move_edges(&prep.moves, d.props, d.gt)) {
            move_set.push(row, label)?;
        }
        let member = |id: u64| {
            let i = index[&id];
            Member {
                proposal: &d.props[i],
                features: &prep.feats[i],
                prob: probs[i],
            }
        };
        let rows = par::try_map(&prep.sets, |&(p, a, b)| {
            mitosis_features_with(member(p), member(a), member(b))
        })?;
        for (row, label) in rows.into_iter().zip(label_mitosis_sets(&prep.sets, d.props, d.gt)) {
            mitosis_set.push(row, label)?;
        }
    }
    info!(
        "training rows: {} proposals ({} positive), {} moves ({}), {} mitosis sets ({})",
        node_set.len(),
        node_set.positives(),
        move_set.len(),
        move_set.positives(),
        mitosis_set.len(),
        mitosis_set.positives()
    );
    Ok(Models {
        gating_radius: gating,
        features: cfg.features,
        proposal,
        moves: fit(&move_set, &cfg.classify.moves, cfg.stage_seed("forest/moves"))?,
        mitosis: fit(&mitosis_set, &cfg.classify.mitosis, cfg.stage_seed("forest/mitosis"))?,
    })
}

fn vector(kind: FeatureKind, values: &[f64]) -> FeatureVector {
    FeatureVector {
        kind,
        values: values.to_vec(),
    }
}

fn fit(ts: &TrainingSet, cfg: &ForestConfig, seed: u64) -> Result<ForestModel> {
    train_forest(ts, &ForestConfig { seed, ..cfg.clone() })
}

/// Scores the proposals and builds the tracking graph over them.
pub fn build(cfg: &PipelineConfig, models: &Models, frames: &[Frame], props: &[Proposal]) -> Result<TrackingGraph> {
    let feats = proposal_feature_table(props, frames)?;
    let probs = par::try_map(&feats, |f| models.proposal.predict(f))?;
    let scorer = ForestScorer::new(props, &probs, frames, &models.moves, &models.mitosis, models.features)?;
    let conf = conflicts(props, cfg.proposals.c1, cfg.proposals.c2);
    let gcfg = GraphConfig {
        gating_radius: Some(cfg.graph.gating_radius.unwrap_or(models.gating_radius)),
        ..cfg.graph.clone()
    };
    let g = build_graph(props, &probs, &conf, &scorer, frames.len(), &gcfg)?;
    info!("graph: {} nodes, {} edges", g.nodes.len(), g.edges.len());
    Ok(g)
}

/// A solved graph turned into tracks and painted label grids.
#[derive(Clone, Debug)]
pub struct Tracked {
    pub solution: Solution,
    pub lineage: LineageForest,
    pub result: TrackingResult,
}

pub fn solve(
    g: &TrackingGraph,
    solve_cfg: &SolveConfig,
    props: &[Proposal],
    width: usize,
    height: usize,
) -> Result<Tracked> {
    let (lineage, solution) = solve_track(g, solver_for(solve_cfg).as_ref())?;
    info!(
        "{:?} objective {:.6}: {} tracks",
        solution.status,
        solution.objective,
        lineage.tracks.len()
    );
    let result = TrackingResult::from_lineage(&lineage, props, width, height, g.num_frames)?;
    Ok(Tracked {
        solution,
        lineage,
        result,
    })
}

/// Detection, graph recall and tracking scores; each part is skipped when
/// its inputs are absent.
pub fn evaluate(
    cfg: &EvalConfig,
    gt: &GroundTruth,
    props: Option<&[Proposal]>,
    graph: Option<&TrackingGraph>,
    result: Option<&TrackingResult>,
) -> Result<EvalReport> {
    Ok(EvalReport {
        detection: match props {
            Some(p) => Some(evaluate_detection(p, gt, cfg)?),
            None => None,
        },
        graph: match (graph, props) {
            (Some(g), Some(p)) => Some(graph_recall(g, p, gt)?),
            _ => None,
        },
        tracking: match result {
            Some(r) => Some(evaluate_tracking(r, gt, cfg)?),
            None => None,
        },
    })
}

/// Everything one `e2e` run produces.
pub struct EndToEnd {
    pub frames: Vec<Frame>,
    pub gt: GroundTruth,
    pub props: Vec<Proposal>,
    pub models: Models,
    pub graph: TrackingGraph,
    pub tracked: Tracked,
    pub report: EvalReport,
}

/// Simulates training sequences and the evaluated sequence, trains on the
/// former and tracks and scores the latter.
pub fn e2e(cfg: &PipelineConfig) -> Result<EndToEnd> {
    cfg.validate()?;
    let training: Vec<(Vec<Frame>, GroundTruth, Vec<Proposal>)> = (0..cfg.classify.training_sequences)
        .map(|i| {
            let (frames, gt) = simulate(&cfg.training_sim(i))?;
            let props = propose(
                cfg,
                &frames,
                Some(&gt),
                &cfg.sim.training_corruption,
                &format!("train-corrupt/{i}"),
            )?;
            Ok((frames, gt, props))
        })
        .collect::<Result<_>>()?;
    let annotated: Vec<Annotated> = training
        .iter()
        .map(|(frames, gt, props)| Annotated { frames, gt, props })
        .collect();
    let models = train(cfg, &annotated)?;

    let (frames, gt) = simulate(&cfg.sim_config())?;
    let props = propose(cfg, &frames, Some(&gt), &cfg.sim.corruption, "corrupt")?;
    let graph = build(cfg, &models, &frames, &props)?;
    let tracked = solve(&graph, &cfg.solve, &props, gt.width, gt.height)?;
    let report = evaluate(&cfg.eval, &gt, Some(&props), Some(&graph), Some(&tracked.result))?;
    Ok(EndToEnd {
        frames,
        gt,
        props,
        models,
        graph,
        tracked,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_seeds_differ_and_are_stable() {
        let a = stage_seed(7, "sim");
        assert_eq!(a, stage_seed(7, "sim"));
        assert_ne!(a, stage_seed(7, "corrupt"));
        assert_ne!(a, stage_seed(8, "sim"));
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let cfg: PipelineConfig = serde_json::from_str(r#"{"seed": 3, "solve": {"backend": "greedy"}}"#).unwrap();
        assert_eq!(cfg.seed, 3);
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"sead": 3}"#).is_err());
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"graph": {"gating": 3}}"#).is_err());
    }

    #[test]
    fn default_config_round_trips() {
        let cfg = PipelineConfig::default();
        let s = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<PipelineConfig>(&s).unwrap(), cfg);
    }
}
