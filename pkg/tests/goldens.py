"""Reference NNCT rows and statistics used across the test modules."""

from nnctseg.teststat import StatName as S

# (counts, Q, R)
PIELOU = ([[137, 23], [38, 30]], 162, 134)
SWAMP = ([[149, 33], [43, 48]], 178, 156)
NEURON = ([[368, 288], [273, 136]], 668, 668)

ROW_ORDER = (
    S.DixonZ11, S.DixonZ22, S.CeyhanZ11, S.CeyhanZ22, S.PielouZ,
    S.PielouZmc, S.PielouZmcAssoc, S.PielouZmcSeg, S.ZI, S.ZII,
)

PIELOU_ROW = (4.36, 2.29, 3.63, 3.61, 4.86, 3.81, 3.69, 3.86, 3.92, 3.62)
SWAMP_ROW = (4.47, 3.54, 4.62, 4.61, 5.90, 4.62, 4.48, 4.67, 4.76, 4.61)
NEURON_ROW = (-2.86, -1.90, -2.70, -2.70, -3.45, -2.70, -2.68, -2.66, -2.68, -2.70)

# Neuron asymptotic p-values by alternative; None where not reported.
NEURON_P_TWO = (.0042, .0575, .0069, .0069, .0006, .0068, None, None, .0073, .0069)
NEURON_P_SEG = (.9979, .9713, .9965, .9965, .9997, None, None, .9961, .9964, .9965)
NEURON_P_ASSOC = (.0021, .0287, .0035, .0035, .0003, None, .0037, None, .0036, .0035)
