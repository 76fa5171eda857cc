"""Fixed lists of zoo specs shared by the suites."""

FINITE = [
    "uniform:n=1",
    "uniform:n=4",
    "uniform:n=100",
    "uniform:n=10000",
    "point:n=1",
    "point:n=5",
    "two_level:n=100,heavy=1,heavy_mass=0.5",
    "two_level:n=64,heavy=1,heavy_mass=0.3",
    "two_level:n=1000,heavy=5,heavy_mass=0.1",
    "zipf:n=100,s=1.0",
    "zipf:n=10000,s=0.7",
    "zipf:n=50,s=2.0",
    "geometric:n=30,ratio=0.5",
    "geometric:n=200,ratio=0.97",
    "paired_flat:j=8",
    "paired:j=10,seed=3",
    "paired:j=200,seed=1,spread=1.5",
    "friendly:n=10,spread=0.3",
    "friendly:n=500,spread=0.45",
    "unfriendly:n=20,zeros=3",
    "dusted:n=100,k=5,light=0.1",
    "dusted:n=2000,k=2,light=0.5",
    "step:n=50,high=10,ratio=1.3",
    "step:n=400,high=1,ratio=3.0",
]

NEAR_UNIFORM = [
    "uniform:n=50",
    "friendly:n=40,spread=0.05",
    "friendly:n=300,spread=0.1",
    "dusted:n=100,k=1,light=0.5",
    "dusted:n=200,k=3,light=0.2",
    "dusted:n=1000,k=10,light=0.3",
    "step:n=100,high=50,ratio=1.05",
    "step:n=60,high=3,ratio=1.2",
    "paired_flat:j=30",
]
