//! Artifact layout inside a run directory.
//!
//! ```text
//! <out>/
//!   corpus.jsonl                      normalized corpus
//!   corpus_summary.json
//!   manifest.json
//!   eval_sample.json                  sampled evaluation users/messages
//!   personas.jsonl
//!   candidates/<model>__<config>.jsonl
//!   generation_log.jsonl
//!   detect/<model>__<config>.json
//!   detect/<model>__<config>__importance.json|.csv
//!   semsim/<model>__<config>__scores.csv|__summary.json
//!   topics/<model>__<config>__divergence.csv|.json
//!   topics/top_common.json
//!   select/<model>__<config>__cosine.jsonl|__ml.jsonl
//!   select/<model>__<config>__overlap.json
//!   report/bundle.json
//!   report/stepwise_deltas.csv
//! ```

use std::path::{Path, PathBuf};

pub struct ArtifactPaths {
    pub out: PathBuf,
}

/// File-name-safe form of a model id. Underscores collapse to '-' so the
/// `model__config` separator stays unambiguous.
pub fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '.' { c } else { '-' })
        .collect()
}

impl ArtifactPaths {
    pub fn new(out: &Path) -> Self {
        ArtifactPaths {
            out: out.to_path_buf(),
        }
    }

    pub fn corpus(&self) -> PathBuf {
        self.out.join("corpus.jsonl")
    }

    pub fn corpus_summary(&self) -> PathBuf {
        self.out.join("corpus_summary.json")
    }

    pub fn manifest(&self) -> PathBuf {
        self.out.join("manifest.json")
    }

    pub fn eval_sample(&self) -> PathBuf {
        self.out.join("eval_sample.json")
    }

    pub fn personas(&self) -> PathBuf {
        self.out.join("personas.jsonl")
    }

    pub fn generation_log(&self) -> PathBuf {
        self.out.join("generation_log.jsonl")
    }

    pub fn candidates_dir(&self) -> PathBuf {
        self.out.join("candidates")
    }

    pub fn candidates(&self, model: &str, config: &str) -> PathBuf {
        // config is a fixed prompt-kind token and needs no sanitizing.
        self.candidates_dir()
            .join(format!("{}__{config}.jsonl", sanitize(model)))
    }

    pub fn candidates_cell(&self, cell: &str) -> PathBuf {
        self.candidates_dir().join(format!("{cell}.jsonl"))
    }

    pub fn detect_dir(&self) -> PathBuf {
        self.out.join("detect")
    }

    pub fn detection(&self, cell: &str) -> PathBuf {
        self.detect_dir().join(format!("{cell}.json"))
    }

    pub fn importance_json(&self, cell: &str) -> PathBuf {
        self.detect_dir().join(format!("{cell}__importance.json"))
    }

    pub fn importance_csv(&self, cell: &str) -> PathBuf {
        self.detect_dir().join(format!("{cell}__importance.csv"))
    }

    pub fn semsim_dir(&self) -> PathBuf {
        self.out.join("semsim")
    }

    pub fn semsim_scores(&self, cell: &str) -> PathBuf {
        self.semsim_dir().join(format!("{cell}__scores.csv"))
    }

    pub fn semsim_summary(&self, cell: &str) -> PathBuf {
        self.semsim_dir().join(format!("{cell}__summary.json"))
    }

    pub fn topics_dir(&self) -> PathBuf {
        self.out.join("topics")
    }

    pub fn divergence_csv(&self, cell: &str) -> PathBuf {
        self.topics_dir().join(format!("{cell}__divergence.csv"))
    }

    pub fn divergence_json(&self, cell: &str) -> PathBuf {
        self.topics_dir().join(format!("{cell}__divergence.json"))
    }

    pub fn topics_common(&self) -> PathBuf {
        self.topics_dir().join("top_common.json")
    }

    pub fn select_dir(&self) -> PathBuf {
        self.out.join("select")
    }

    pub fn outcomes(&self, cell: &str, strategy: &str) -> PathBuf {
        self.select_dir().join(format!("{cell}__{strategy}.jsonl"))
    }

    pub fn overlap(&self, cell: &str) -> PathBuf {
        self.select_dir().join(format!("{cell}__overlap.json"))
    }

    pub fn report_dir(&self) -> PathBuf {
        self.out.join("report")
    }

    pub fn bundle(&self) -> PathBuf {
        self.report_dir().join("bundle.json")
    }

    pub fn stepwise_csv(&self) -> PathBuf {
        self.report_dir().join("stepwise_deltas.csv")
    }

    /// Cell keys (`<model>__<config>`) for every candidates file present.
    pub fn candidate_cells(&self) -> Vec<String> {
        let mut cells = Vec::new();
        if let Ok(entries) = std::fs::read_dir(self.candidates_dir()) {
            for entry in entries.flatten() {
                let name = entry.file_name().to_string_lossy().to_string();
                if let Some(stem) = name.strip_suffix(".jsonl") {
                    cells.push(stem.to_string());
                }
            }
        }
        cells.sort();
        cells
    }
}
