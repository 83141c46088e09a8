"""Published size/power values used as the comparison fixture for ``reproduce_tables``.

Keys are ``(method, param)``; values follow ``COLUMNS``.  Table 1 is n = 20,
table 2 is n = 40.  Null value theta0 = 2; the power columns use true
value 1.
"""

COLUMNS = ("size_0", "size_0.05", "size_0.10", "size_0.20",
           "power_0", "power_0.1", "power_0.15", "power_0.20")

# (kind, eps) for each column
COLUMN_SPECS = (("size", 0.0), ("size", 0.05), ("size", 0.10), ("size", 0.20),
                ("power", 0.0), ("power", 0.10), ("power", 0.15), ("power", 0.20))

TABLE_N = {"table1": 20, "table2": 40}

TABLE1 = {
    ("rao_tau", 0.0): (0.2601, 0.3093, 0.3453, 0.4661, 0.9278, 0.6791, 0.6887, 0.5088),
    ("rao_tau", 0.1): (0.1895, 0.1748, 0.1561, 0.1989, 0.9544, 0.7213, 0.7301, 0.0595),
    ("rao_tau", 0.2): (0.2120, 0.1776, 0.1417, 0.1174, 0.9747, 0.8398, 0.8430, 0.5095),
    ("rao_tau", 0.3): (0.2532, 0.2113, 0.1660, 0.1275, 0.9826, 0.8963, 0.8961, 0.7301),
    ("rao_tau", 0.4): (0.2963, 0.2447, 0.1986, 0.1471, 0.9863, 0.9228, 0.9257, 0.7893),
    ("rao_tau", 0.5): (0.3243, 0.2773, 0.2307, 0.1695, 0.9875, 0.9363, 0.9386, 0.8254),
    ("rao_tau", 0.6): (0.3512, 0.3055, 0.2599, 0.1899, 0.9885, 0.9441, 0.9437, 0.8434),
    ("rao_tau", 0.7): (0.3751, 0.3258, 0.2762, 0.2060, 0.9884, 0.9466, 0.9469, 0.8541),
    ("mdpde_beta", 0.0): (0.0453, 0.0682, 0.1048, 0.1909, 0.7200, 0.4365, 0.4384, 0.2323),
    ("mdpde_beta", 0.1): (0.0476, 0.0602, 0.0780, 0.1417, 0.7799, 0.5223, 0.5267, 0.3029),
    ("mdpde_beta", 0.2): (0.0498, 0.0552, 0.0667, 0.1103, 0.7922, 0.5751, 0.5780, 0.3558),
    ("mdpde_beta", 0.3): (0.0494, 0.0517, 0.0584, 0.0897, 0.7882, 0.5997, 0.6024, 0.3878),
    ("mdpde_beta", 0.4): (0.0489, 0.0505, 0.0535, 0.0773, 0.7779, 0.6067, 0.6058, 0.4106),
    ("mdpde_beta", 0.5): (0.0494, 0.0498, 0.0504, 0.0692, 0.7634, 0.6048, 0.6037, 0.4221),
    ("mdpde_beta", 0.6): (0.0491, 0.0504, 0.0497, 0.0647, 0.7492, 0.6008, 0.5986, 0.4265),
    ("mdpde_beta", 0.7): (0.0502, 0.0495, 0.0494, 0.0613, 0.7348, 0.5932, 0.5919, 0.4259),
}

TABLE2 = {
    ("rao_tau", 0.0): (0.3014, 0.3588, 0.4407, 0.5919, 0.9948, 0.8064, 0.7591, 0.5957),
    ("rao_tau", 0.1): (0.2393, 0.1934, 0.1757, 0.2032, 0.9991, 0.9540, 0.9229, 0.7712),
    ("rao_tau", 0.2): (0.4257, 0.2559, 0.1970, 0.1317, 0.9995, 0.9916, 0.9846, 0.9204),
    ("rao_tau", 0.3): (0.4257, 0.3485, 0.2782, 0.1753, 0.9997, 0.9997, 0.9953, 0.9694),
    ("rao_tau", 0.4): (0.5021, 0.4294, 0.3572, 0.2388, 0.9999, 0.9989, 0.9978, 0.9851),
    ("rao_tau", 0.5): (0.5642, 0.4920, 0.4253, 0.2993, 0.9999, 0.9992, 0.9986, 0.9908),
    ("rao_tau", 0.6): (0.6084, 0.5415, 0.4742, 0.3491, 1.0000, 0.9992, 0.9994, 0.9935),
    ("rao_tau", 0.7): (0.6416, 0.5755, 0.5081, 0.3831, 1.0000, 0.9994, 0.9994, 0.9948),
    ("mdpde_beta", 0.0): (0.0467, 0.0758, 0.1309, 0.2728, 0.9838, 0.8093, 0.7483, 0.4905),
    ("mdpde_beta", 0.1): (0.0469, 0.0623, 0.0959, 0.1987, 0.9870, 0.8770, 0.8317, 0.6072),
    ("mdpde_beta", 0.2): (0.0464, 0.0554, 0.0800, 0.1526, 0.9862, 0.9010, 0.8687, 0.6778),
    ("mdpde_beta", 0.3): (0.0481, 0.0529, 0.0704, 0.1220, 0.9846, 0.9084, 0.8804, 0.7169),
    ("mdpde_beta", 0.4): (0.0483, 0.0518, 0.0649, 0.1036, 0.9808, 0.9059, 0.8809, 0.7316),
    ("mdpde_beta", 0.5): (0.0500, 0.0519, 0.0618, 0.0929, 0.9756, 0.9008, 0.8742, 0.7338),
    ("mdpde_beta", 0.6): (0.0500, 0.0501, 0.0577, 0.0858, 0.9689, 0.8914, 0.8662, 0.7317),
    ("mdpde_beta", 0.7): (0.0504, 0.0519, 0.0562, 0.0801, 0.9634, 0.8813, 0.8562, 0.7258),
}

REFERENCE = {"table1": TABLE1, "table2": TABLE2}
