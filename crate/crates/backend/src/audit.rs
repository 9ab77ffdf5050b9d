use std::io::Write;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::request::{GenerationRequest, GenerationResult};

/// One generation call with the pipeline stages that led up to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub seq: usize,
    /// `None` for moderator calls.
    pub agent_id: Option<String>,
    /// Stage names in execution order, e.g. `retrieve`, `filter_and_merge`.
    pub stages: Vec<String>,
    /// Chunk ids returned by retrieval.
    #[serde(default)]
    pub retrieved: Vec<String>,
    /// Chunk ids removed by constraint filtering.
    #[serde(default)]
    pub dropped: Vec<String>,
    /// Counter hints offered to the agent; kept out of the transcript.
    #[serde(default)]
    pub hints: Vec<String>,
    pub request: GenerationRequest,
    pub result: GenerationResult,
}

impl AuditRecord {
    pub fn new(agent_id: Option<&str>, request: GenerationRequest, result: GenerationResult) -> Self {
        AuditRecord {
            seq: 0,
            agent_id: agent_id.map(str::to_string),
            stages: Vec::new(),
            retrieved: Vec::new(),
            dropped: Vec::new(),
            hints: Vec::new(),
            request,
            result,
        }
    }
}

/// Append-only audit trail, serialized as JSONL on demand.
#[derive(Debug, Default)]
pub struct AuditLog {
    records: Mutex<Vec<AuditRecord>>,
}

impl AuditLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Store `record`, numbering it in arrival order.
    pub fn push(&self, mut record: AuditRecord) {
        let mut records = self.records.lock().expect("audit log poisoned");
        record.seq = records.len();
        records.push(record);
    }

    pub fn records(&self) -> Vec<AuditRecord> {
        self.records.lock().expect("audit log poisoned").clone()
    }

    pub fn len(&self) -> usize {
        self.records.lock().expect("audit log poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for record in self.records.lock().expect("audit log poisoned").iter() {
            serde_json::to_writer(&mut out, record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}
