#pragma once

#include "nextedit/diff.hpp"
#include "nextedit/locator.hpp"

namespace nextedit::testing {

// A Python function whose body mixes deletion, replacement and insertion.
inline Hunk extract_tags_hunk() {
  Hunk h;
  h.file = "moto/tags.py";
  h.old_lines = {
      "def extract_tags(req_data):",
      "    tags = []",
      "    req_tags = {k: v for k, v in req_data.items() if k.startswith('Tags.member.')}",
      "    for i in range(int(len(req_tags.keys()) / 2)):",
      "        key = req_tags['Tags.member.' + str(i + 1) + '.Key']",
      "        value = req_tags['Tags.member.' + str(i + 1) + '.Value']",
      "        tags.append({'Key': key, 'Value': value})",
      "    return tags",
  };
  h.new_lines = {
      "def extract_tags(req_data):",
      "    tags = []",
      "    for i in range(1, 200):",
      "        k1='Tags.member.",
      "        k2='Tags.member.",
      "        key = req_data.get(k1)",
      "        value = req_data.get(k2)",
      "        if key is None or value is None:",
      "            break",
      "        tags.append({'Key': key, 'Value': value})",
      "    return tags",
  };
  h.old_span = {1, 8};
  h.new_span = {1, 11};
  return h;
}

// A condition rewritten to use a variable introduced right above it, framed
// by one unchanged line on each side.
inline Hunk sampler_hunk() {
  Hunk h;
  h.file = "modules/sd_samplers_kdiffusion.py";
  h.old_lines = {
      "        extra_params_kwargs = self.initialize(p)",
      "        if 'sigma_min' in inspect.signature(self.func).parameters:",
      "            extra_params_kwargs['sigma_min'] = sigma_sched[-2]",
  };
  h.new_lines = {
      "        extra_params_kwargs = self.initialize(p)",
      "        parameters = inspect.signature(self.func).parameters",
      "        xi = x + noise * sigma_sched[0]",
      "        if 'sigma_min' in parameters:",
      "            extra_params_kwargs['sigma_min'] = sigma_sched[-2]",
  };
  h.old_span = {1, 3};
  h.new_span = {1, 5};
  return h;
}

// The zero-context form of the sampler change: one condition line becomes
// three lines, at line 15 of the sampler file.
inline Edit sampler_condition_edit() {
  Edit e;
  e.file = "modules/sd_samplers_kdiffusion.py";
  e.line_start = 15;
  e.line_end = 15;
  e.code_before = {"        if 'sigma_min' in inspect.signature(self.func).parameters:"};
  e.code_after = {
      "        parameters = inspect.signature(self.func).parameters",
      "        xi = x + noise * sigma_sched[0]",
      "        if 'sigma_min' in parameters:",
  };
  return e;
}

inline Lines sampler_window() {
  return {
      "        extra_params_kwargs = self.initialize(p)",
      "        parameters = inspect.signature(self.func).parameters",
      "        xi = x + noise * sigma_sched[0]",
      "        if 'sigma_min' in parameters:",
      "            extra_params_kwargs['sigma_min'] = sigma_sched[-2]",
      "        if 'n' in inspect.signature(self.func).parameters:",
      "            extra_params_kwargs['n'] = len(sigma_sched) - 1",
      "        if 'sigma_sched' in inspect.signature(self.func).parameters:",
      "            extra_params_kwargs['sigma_sched'] = sigma_sched",
  };
}

// Labels asking to rewrite window line `line` (1-based) only.
inline LabelSequence replace_line(std::size_t lines, int line) {
  auto l = LabelSequence::unchanged(lines);
  l.inline_labels[line - 1] = InlineLabel::Replace;
  return l;
}

}  // namespace nextedit::testing
