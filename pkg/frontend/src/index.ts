export { parseSweepCsv, CsvError, EXPECTED_HEADER, SweepRow } from "./csv";
export { renderSvg, groupRows, CurveSpec, Curve, GroupKey, Metric, RenderResult } from "./render";
