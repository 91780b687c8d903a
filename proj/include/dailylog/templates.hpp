#pragma once
// Built-in prompt template texts. The same content ships as editable files
// under templates/; a unit test keeps file and built-in copies identical.
//
// Template format: a line "@@ <Section Name>" opens a section; the body runs
// until the next marker. {{name}} slots are filled at render time.

namespace dailylog::prompt::builtin {

inline constexpr const char* kContextV1 = R"TPL(@@ Data Introduction
You're an expert in signal analysis. Please analyze and predict the user's activity context based on the features of these sensor data.

Data Introduction:
The measurements below cover one {{window_seconds}}-second time window recorded at {{datetime}}. Sensors present in this window: {{sensors_present}}.

@@ Feature Explanation
Feature Explanation:
Date-time: {{datetime}} | Location: {{location}}
Features meaning of motion and scene:
- Each IMU sensor contributes 26 values computed on the tri-axis vector amplitude: nine time-domain statistics (mean, standard deviation, skewness, kurtosis, maximum, minimum, interquartile range, signal entropy, temporal entropy) describing fluctuation and complexity; six frequency-domain values (logarithmic energy in five equal bands plus spectral entropy) describing how energy spreads over frequency; two autocorrelation values (dominant lag in seconds and its peak) capturing periodicity such as gait; nine axis-level statistics (per-axis mean and standard deviation plus the three inter-axis correlations) preserving direction.
- The audio vector has 120 values: means of 20 Mel-frequency cepstral coefficients, 20 delta MFCCs (short-term change) and 20 acceleration MFCCs (rate of change), followed by the standard deviations of the same three groups.
- Ambient context: illumination {{light}}; sound level {{sound}}; temperature {{temperature}}; altitude {{altitude}}.
- Physiology: {{physio}}.

@@ Task Explanation
Task Explanation:
Please give a description of the activity context, including time, location, type and scene. Pick the activity category from: lying, sitting, standing, walking, ascending_stairs, descending_stairs, jogging, biking. Pick the scenario that best matches the ambient evidence. Use only the data provided and reply with exactly one line in the output format.

@@ Specific Feature Vectors
Specific Feature Vectors:
{{imu_vectors}}
Audio: {{audio_vector}}

@@ Output Format
Output Format:
Date-time: ...; location information: ...; activity category: ...; scenario: ...
[template: {{template_version}}]
)TPL";

inline constexpr const char* kContextNaiveV1 = R"TPL(@@ Task Explanation
Classify the user's activity and scenario from the feature vectors below.

@@ Specific Feature Vectors
{{imu_vectors}}
Audio: {{audio_vector}}

@@ Output Format
activity category: ...; scenario: ...
[template: {{template_version}}]
)TPL";

inline constexpr const char* kContextFreeformV1 = R"TPL(@@ Free-form
Here is sensor data from someone's phone and watch taken at {{datetime}} near {{location}}. The motion feature numbers are:
{{imu_vectors}}
and the audio feature numbers are {{audio_vector}}. The surroundings read as illumination {{light}}, sound {{sound}}, temperature {{temperature}}. What do you think the person is doing and where are they? Answer in your own words.
[template: {{template_version}}]
)TPL";

inline constexpr const char* kSummaryV1 = R"TPL(@@ Instruction
Please summarize the user's activity over the past {{window_hours}} hours based on each activity log entry. Your summary should include:
a). The user's movement trajectory and locations visited.
b). Changes in activity types and time distribution.
c). Descriptions of environmental conditions (e.g., lighting, temperature, noise levels).
d). Overall trends in physiological indicators.

Then, analyze the data to detect any of the following anomalies, and provide natural, conversational feedback to the user to raise awareness or suggest timely adjustments:
a). Environmental anomalies: prolonged exposure to extreme darkness, heat, or high noise levels.
b). Behavioral anomalies: extended periods of inactivity.
c). Health anomalies: elevated heart rate, low blood oxygen levels, or abnormal body temperature.

Please summarize and analyze step by step to produce a natural, logical piece of text.

@@ Activity Log Entries
The {{entry_count}} log entries below are ordered oldest first, one JSON object per line:
{{entries}}
[template: {{template_version}}]
)TPL";

}  // namespace dailylog::prompt::builtin
