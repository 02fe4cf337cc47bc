"""Pilot-calibrated constants; regenerate with scripts/calibrate.py."""

MARGIN = 2.0
PILOT_SEEDS = (1000, 1060)

DECAY_GOLDEN = {2: 0.8793172327206563, 4: 36.600682578996086, 8: 17230023.765776515}
ABSTRACT = {'ratio': 4.16036506186378, 'refined': 6.165570616832648}
C_EXP = {'A2': 0.39513995630824184,
 'A9': 0.04106427095906849,
 'bht': 1.5687541348553167}
MEASURED = {'bht_energy': 0.07432544468767006,
 'bht_size': 0.21068865909303958,
 'energy_lemma': 0.3333333333333333,
 'l2': 1.5468888005697135,
 'size_lemma_2': 0.8579552416597674,
 'size_lemma_4': 1.2819041708569128,
 'split_cor': 0.7071067811865476}
JN_WINDOW = (0.4560072983664882, 2.0000000000000004)
