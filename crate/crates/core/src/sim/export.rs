use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::grid::Simulation;
use super::SimError;
use crate::phylo::{LeafAnnotation, PhyloTree};
use crate::rng::sampling_stream;
use crate::surface::{GenomeLayout, HeaderKind};

/// A genome drawn from the end state.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledGenome {
    pub pe_x: usize,
    pub pe_y: usize,
    pub bytes: Vec<u8>,
    pub tracker_id: Option<u64>,
    pub label: String,
}

/// Draws `k_per_pe` distinct genomes from every PE, in PE order, using a
/// stream disjoint from the PEs' own. Labels are `pe{x}_{y}`, with a
/// `_{j}` suffix when more than one genome is taken per PE.
pub fn sample_end_state(sim: &Simulation, k_per_pe: usize) -> Vec<SampledGenome> {
    let mut rng = sampling_stream(sim.config().grid.seed);
    let mut out = Vec::new();
    for pe in sim.pes() {
        let k = k_per_pe.min(pe.population());
        for (j, i) in sample(&mut rng, pe.population(), k).into_iter().enumerate() {
            let label = if k_per_pe == 1 {
                format!("pe{}_{}", pe.x, pe.y)
            } else {
                format!("pe{}_{}_{}", pe.x, pe.y, j)
            };
            out.push(SampledGenome {
                pe_x: pe.x,
                pe_y: pe.y,
                bytes: pe.genome(i).to_vec(),
                tracker_id: pe.genome_id(i),
                label,
            });
        }
    }
    out
}

/// Perfect-tracker tree over the sampled genomes, if tracking was on.
pub fn perfect_tree(sim: &Simulation, samples: &[SampledGenome]) -> Option<PhyloTree> {
    let tracker = sim.tracker()?;
    let leaves: Vec<(u64, String)> = samples
        .iter()
        .filter_map(|s| s.tracker_id.map(|id| (id, s.label.clone())))
        .collect();
    Some(tracker.to_tree(&leaves))
}

/// One row of the genome export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenomeRow {
    pub pe_x: usize,
    pub pe_y: usize,
    pub genome_hex: String,
    pub counter: u64,
    pub founder_tag: Option<u16>,
    pub fitness: Option<f32>,
    pub taxon_label: String,
    /// Layout descriptor, e.g. `tagged/tilted/64x1`.
    pub layout: String,
}

impl GenomeRow {
    pub fn new(layout: &GenomeLayout, s: &SampledGenome) -> Self {
        Self {
            pe_x: s.pe_x,
            pe_y: s.pe_y,
            genome_hex: layout.to_hex(&s.bytes),
            counter: layout.counter(&s.bytes),
            founder_tag: layout.founder_tag(&s.bytes),
            fitness: (layout.header() == HeaderKind::Fitness).then(|| layout.fitness(&s.bytes)),
            taxon_label: s.label.clone(),
            layout: layout.descriptor(),
        }
    }
}

pub fn genomes_csv(layout: &GenomeLayout, samples: &[SampledGenome]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for s in samples {
        writer
            .serialize(GenomeRow::new(layout, s))
            .expect("in-memory csv write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
}

/// Parses a genome export and decodes each row into a leaf for
/// reconstruction. Every row must use the same layout, and the decoded
/// counter and header must agree with the row's columns.
pub fn read_genomes_csv(text: &str) -> Result<(GenomeLayout, Vec<LeafAnnotation>), SimError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut layout: Option<GenomeLayout> = None;
    let mut leaves = Vec::new();
    for (k, row) in reader.deserialize::<GenomeRow>().enumerate() {
        let line = k + 2;
        let err = |message: String| SimError::Import { row: line, message };
        let row = row.map_err(|e| err(e.to_string()))?;
        let row_layout =
            GenomeLayout::parse_descriptor(&row.layout).map_err(|e| err(e.to_string()))?;
        match layout {
            None => layout = Some(row_layout),
            Some(l) if l != row_layout => {
                return Err(err(format!(
                    "layout {} differs from earlier rows ({})",
                    row_layout.descriptor(),
                    l.descriptor()
                )))
            }
            Some(_) => {}
        }
        let bytes = row_layout
            .from_hex(&row.genome_hex)
            .map_err(|e| err(e.to_string()))?;
        if row_layout.counter(&bytes) != row.counter {
            return Err(err(format!(
                "counter column {} disagrees with genome counter {}",
                row.counter,
                row_layout.counter(&bytes)
            )));
        }
        if row.founder_tag.is_some() && row_layout.founder_tag(&bytes) != row.founder_tag {
            return Err(err("founder_tag column disagrees with genome".into()));
        }
        let annotation = row_layout
            .annotation(&bytes)
            .map_err(|e| err(e.to_string()))?;
        leaves.push(LeafAnnotation::new(
            annotation.to_records(),
            row.taxon_label,
            row_layout.founder_tag(&bytes),
        ));
    }
    match layout {
        Some(layout) => Ok((layout, leaves)),
        None => Err(SimError::Import {
            row: 1,
            message: "no genomes".into(),
        }),
    }
}
