/* SPDX-License-Identifier: Apache-2.0 */
/* Copyright 2026 The chanpred Authors */

/* The public header must compile as C and link against the shared library. */

#include <chanpred/chanpred.h>
#include <stdio.h>
#include <string.h>

int main(void) {
  cp_generate_params p;
  cp_dataset* ds = NULL;
  cp_dataset_info info;
  cp_generate_params_default(&p);
  p.count = 8;
  p.obs_len = 3;
  if (cp_dataset_generate(&p, &ds) != CP_OK) {
    fprintf(stderr, "generate failed: %s\n", cp_last_error());
    return 1;
  }
  if (cp_dataset_info_get(ds, &info) != CP_OK || info.count != 8) return 1;
  cp_dataset_free(ds);
  if (cp_dataset_generate(NULL, &ds) != CP_ERR_INVALID_ARGUMENT || strlen(cp_last_error()) == 0) return 1;
  printf("ok %s\n", cp_version());
  return 0;
}
