//! Diagnostic prompt construction.
//!
//! The instruction text is fixed; representation flags decide which data
//! blocks (and their headers) appear, and decentralized classification
//! specializes the fault prompt to a single fault type.

use crate::dataset::{
    render, ReferenceMode, RenderedBlocks, Representation, WindowStats, WindowView,
};
use crate::faults::FaultType;

/// A system/user message pair ready for a completion request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptPair {
    pub system_text: String,
    pub user_text: String,
}

pub const ANOMALY_SYSTEM_TEXT: &str = "\
You are an expert HVAC monitoring system. Your job is to analyze sensor data from HVAC systems to detect potential anomalies.

When analyzing sensor data:
- Look for unusual patterns or trends in the data
- Consider relationships between different sensors

Common anomaly patterns:
- Sudden spikes or drops in readings
- Unusual patterns in sensor relationships
- Values outside normal operating ranges
- Inconsistent behavior between related sensors";

pub const ANOMALY_TASK_TEXT: &str = "Analyze the following HVAC sensor data to determine if the latest hour of data is anomalous with respect to the previous hours of data.";

pub const ANOMALY_QUESTION_TEXT: &str = "\
Is there evidence of any anomalies? Provide your analysis, including:
- Concise, key observations from the sensor data
- Whether you believe an anomaly is present (yes/no)
- If an anomaly is present, provide a concise explanation for your conclusion";

pub const FAULT_SYSTEM_PREAMBLE: &str = "\
You are an expert HVAC fault classification system. Your job is to analyze sensor data and classify the type of fault present in the system.

When analyzing sensor data:
- Look for unusual patterns or trends in the data
- Consider relationships between different sensors";

pub const FAULT_TASK_TEXT: &str = "Analyze the following HVAC sensor data to classify the most probable type of faults present in the last hour of data with respect to the previous hours of data.";

pub const FAULT_QUESTION_HEAD: &str =
    "Classify the type of fault present. For each fault type, indicate whether it is present (true/false):";

pub const FAULT_QUESTION_TAIL: &str =
    "Provide a concise, brief explanation for your classification";

const SENSOR_DATA_HEADER: &str = "Sensor data:";
const STATISTICS_HEADER: &str = "Statistics:";
const REFERENCE_DATA_HEADER: &str = "Reference sensor data:";
const REFERENCE_STATISTICS_HEADER: &str = "Reference sensor statistics";

/// Heading introducing accumulated continual-learning examples, when present.
pub const FEEDBACK_HEADER: &str = "Labeled examples from previous cycles:";

/// Characteristic signature of each fault as given to the classifier.
pub fn fault_pattern_line(fault: FaultType) -> &'static str {
    match fault {
        FaultType::RefrigerantLeak => "- Refrigerant leak: Reduced suction pressure, reduced cooling output, increased compressor power and increased supply air temperature",
        FaultType::CompressorFault => "- Compressor failure: Reduced compressor power, reduced cooling output, increased suction pressure and decreased discharge pressure",
        FaultType::FilterBlockage => "- Blocked filter: Reduced airflow rate, increased return air temperature and increased compressor power",
    }
}

/// Builds the anomaly-detection prompt for one window.
///
/// `reference` must be supplied exactly when the representation selects a
/// reference mode; `feedback` appends a labeled-examples section when the
/// continual loop has memory to inject.
pub fn build_anomaly_prompt(
    window: &WindowView<'_>,
    stats: &WindowStats,
    repr: Representation,
    reference: Option<(&WindowView<'_>, &WindowStats)>,
    feedback: Option<&str>,
) -> PromptPair {
    let blocks = render(window, stats, repr, reference);
    let mut user = String::from(ANOMALY_TASK_TEXT);
    user.push_str("\n\n");
    push_block(&mut user, SENSOR_DATA_HEADER, &blocks.sensor_data);
    push_block(&mut user, STATISTICS_HEADER, &blocks.statistics);
    push_block(&mut user, REFERENCE_DATA_HEADER, &blocks.reference_data);
    push_block(
        &mut user,
        REFERENCE_STATISTICS_HEADER,
        &blocks.reference_statistics,
    );
    user.push('\n');
    user.push_str(ANOMALY_QUESTION_TEXT);
    if let Some(feedback) = feedback {
        if !feedback.is_empty() {
            user.push_str("\n\n");
            user.push_str(FEEDBACK_HEADER);
            user.push('\n');
            user.push_str(feedback);
        }
    }
    PromptPair {
        system_text: ANOMALY_SYSTEM_TEXT.to_string(),
        user_text: user,
    }
}

/// Builds the fault-classification prompt for one window.
///
/// `faults` selects which fault types the prompt describes and asks about:
/// all three in centralized mode, exactly one per decentralized agent. The
/// fault prompt never embeds reference data.
pub fn build_fault_prompt(
    window: &WindowView<'_>,
    stats: &WindowStats,
    repr: Representation,
    faults: &[FaultType],
) -> PromptPair {
    assert!(!faults.is_empty(), "fault prompt needs at least one fault");
    let window_repr = Representation::new(repr.mode, ReferenceMode::None);
    let blocks: RenderedBlocks = render(window, stats, window_repr, None);

    let mut system = String::from(FAULT_SYSTEM_PREAMBLE);
    system.push_str("\n\nCommon fault patterns:\n");
    for fault in faults {
        system.push_str(fault_pattern_line(*fault));
        system.push('\n');
    }
    let system = system.trim_end().to_string();

    let mut user = String::from(FAULT_TASK_TEXT);
    user.push_str("\n\n");
    push_block(&mut user, SENSOR_DATA_HEADER, &blocks.sensor_data);
    push_block(&mut user, STATISTICS_HEADER, &blocks.statistics);
    user.push('\n');
    user.push_str(FAULT_QUESTION_HEAD);
    user.push('\n');
    for fault in faults {
        user.push_str("- ");
        user.push_str(fault.label());
        user.push('\n');
    }
    user.push_str(FAULT_QUESTION_TAIL);

    PromptPair {
        system_text: system,
        user_text: user,
    }
}

fn push_block(out: &mut String, header: &str, block: &str) {
    if block.is_empty() {
        return;
    }
    out.push_str(header);
    out.push('\n');
    out.push_str(block);
    if !block.ends_with('\n') {
        out.push('\n');
    }
}
