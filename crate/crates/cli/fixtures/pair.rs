structure pair over pos
points x y
