# x below y
structure chain over pos
points x y
edge le(x,y)
